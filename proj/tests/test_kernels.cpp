#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "aos/apps.hpp"
#include "aos/kernels.hpp"
#include "aos/server.hpp"
#include "test_util.hpp"

namespace aos {
namespace {

namespace k = kernels;

// ---------------------------------------------------------------------------
// Oracles

std::vector<std::uint64_t> histogram_oracle(const std::vector<double>& xs,
                                            const std::vector<double>& edges) {
  std::vector<std::uint64_t> counts(edges.size() + 1, 0);
  for (double x : xs) {
    std::size_t bin = edges.size();
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (x < edges[i]) {
        bin = i;
        break;
      }
    }
    counts[bin] += 1;
  }
  return counts;
}

struct PartialOracle {
  std::vector<double> sums;
  std::vector<std::uint64_t> counts;
};

PartialOracle partial_oracle(const std::vector<double>& pts, std::size_t rows,
                             const std::vector<double>& cents, std::size_t centers,
                             std::size_t dims) {
  PartialOracle o{std::vector<double>(centers * dims, 0.0), std::vector<std::uint64_t>(centers, 0)};
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < centers; ++c) {
      double d = 0;
      for (std::size_t j = 0; j < dims; ++j) {
        double diff = pts[r * dims + j] - cents[c * dims + j];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    o.counts[best] += 1;
    for (std::size_t j = 0; j < dims; ++j) o.sums[best * dims + j] += pts[r * dims + j];
  }
  return o;
}

// Plain Lloyd over the whole point set, no blocking.
std::vector<double> lloyd_oracle(const std::vector<double>& pts, std::size_t n,
                                 std::vector<double> cents, std::size_t centers, std::size_t dims,
                                 int iterations) {
  for (int it = 0; it < iterations; ++it) {
    PartialOracle p = partial_oracle(pts, n, cents, centers, dims);
    for (std::size_t c = 0; c < centers; ++c) {
      if (p.counts[c] == 0) continue;
      for (std::size_t j = 0; j < dims; ++j) {
        cents[c * dims + j] = p.sums[c * dims + j] / static_cast<double>(p.counts[c]);
      }
    }
  }
  return cents;
}

std::vector<double> naive_matmul(const std::vector<double>& a, const std::vector<double>& b,
                                 std::size_t n) {
  std::vector<double> c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t t = 0; t < n; ++t) s += a[i * n + t] * b[t * n + j];
      c[i * n + j] = s;
    }
  return c;
}

std::vector<double> flatten(const std::vector<BlockPayload>& blocks) {
  std::vector<double> out;
  for (const auto& b : blocks) out.insert(out.end(), b.values.begin(), b.values.end());
  return out;
}

// ---------------------------------------------------------------------------
// Histogram

TEST(FDistTest, SampleMeanMatchesAnalyticMean) {
  auto blocks = k::gen_f_array(2024, 1'000'000, k::kFDistD1, k::kFDistD2, 100'000);
  ASSERT_EQ(blocks.size(), 10u);
  double sum = 0;
  std::size_t n = 0;
  for (const auto& b : blocks) {
    for (double x : b.values) {
      ASSERT_GE(x, 0.0);
      sum += x;
      ++n;
    }
  }
  EXPECT_EQ(n, 1'000'000u);
  double expected = k::kFDistD2 / (k::kFDistD2 - 2.0);
  EXPECT_NEAR(sum / n, expected, 0.01 * expected);
}

TEST(FDistTest, DeterministicAndBlockAddressable) {
  auto a = k::gen_f_array(1, 25'000, k::kFDistD1, k::kFDistD2, 10'000);
  auto b = k::gen_f_array(1, 25'000, k::kFDistD1, k::kFDistD2, 10'000);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[2].values.size(), 5'000u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(bit_equal(a[i], b[i]));
    EXPECT_TRUE(bit_equal(a[i], k::gen_f_block(1, 25'000, k::kFDistD1, k::kFDistD2, 10'000, i)));
  }
  EXPECT_FALSE(bit_equal(a[0], k::gen_f_array(2, 25'000, k::kFDistD1, k::kFDistD2, 10'000)[0]));
}

TEST(HistogramTest, StandardEdgesAreGeometric) {
  const auto& spec = k::HistogramSpec::standard();
  ASSERT_EQ(spec.edges.size(), 139u);
  EXPECT_EQ(spec.bin_count(), 140u);
  for (std::size_t i = 0; i < spec.edges.size(); ++i) {
    double expected = std::exp2(-7.0 + 13.0 * static_cast<double>(i) / 138.0);
    EXPECT_TRUE(testing::rel_close(spec.edges[i], expected, 1e-12)) << i;
  }
}

TEST(HistogramTest, TrivialCases) {
  const auto& spec = k::HistogramSpec::standard();
  auto empty = k::histogram_block({}, spec);
  EXPECT_EQ(empty.counts, std::vector<std::uint64_t>(140, 0));
  std::vector<double> small(37, spec.edges[0] / 2);
  EXPECT_EQ(k::histogram_block(small, spec).counts[0], 37u);
  std::vector<double> edge{spec.edges[5]};
  EXPECT_EQ(k::histogram_block(edge, spec).counts[6], 1u);
  std::vector<double> huge{1e300};
  EXPECT_EQ(k::histogram_block(huge, spec).counts[139], 1u);
}

TEST(HistogramTest, MatchesLinearScanOracle) {
  const auto& spec = k::HistogramSpec::standard();
  auto blocks = k::gen_f_array(8, 200'000, k::kFDistD1, k::kFDistD2, 50'000);
  std::vector<BlockPayload> parts;
  std::vector<double> all;
  for (const auto& b : blocks) {
    auto h = k::histogram_block(b.values, spec);
    EXPECT_EQ(h.counts, histogram_oracle(b.values, spec.edges));
    std::uint64_t total = 0;
    for (auto c : h.counts) total += c;
    EXPECT_EQ(total, b.values.size());
    parts.push_back(h);
    all.insert(all.end(), b.values.begin(), b.values.end());
  }
  EXPECT_EQ(k::merge_histograms(parts).counts, histogram_oracle(all, spec.edges));
  std::reverse(parts.begin(), parts.end());
  EXPECT_EQ(k::merge_histograms(parts).counts, histogram_oracle(all, spec.edges));
}

TEST(HistogramTest, RejectsNaNAndNegatives) {
  const auto& spec = k::HistogramSpec::standard();
  std::vector<double> nan{1.0, std::nan("")};
  EXPECT_THROW(k::histogram_block(nan, spec), Error);
  std::vector<double> neg{-1.0};
  EXPECT_THROW(k::histogram_block(neg, spec), Error);
  std::vector<BlockPayload> mismatched{BlockPayload::histogram({1, 2}),
                                       BlockPayload::histogram({1, 2, 3})};
  EXPECT_THROW(k::merge_histograms(mismatched), Error);
}

// ---------------------------------------------------------------------------
// k-means

TEST(KMeansTest, PointsAreDeterministicAndInRange) {
  auto a = k::gen_points(3, 250, 7, 100);
  ASSERT_EQ(a.size(), 3u);
  std::uint64_t rows = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    rows += a[i].rows;
    EXPECT_EQ(a[i].cols, 7u);
    for (double v : a[i].values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
    EXPECT_TRUE(bit_equal(a[i], k::gen_points_block(3, 250, 7, 100, i)));
  }
  EXPECT_EQ(rows, 250u);
}

TEST(KMeansTest, TieGoesToLowestIndex) {
  auto cents = BlockPayload::centroids(3, 1, {0.0, 2.0, 5.0});
  auto pts = BlockPayload::points(2, 1, {1.0, 2.0});
  auto p = k::kmeans_partial(PayloadView::of(pts), PayloadView::of(cents));
  EXPECT_EQ(p.counts, (std::vector<std::uint64_t>{1, 1, 0}));
  EXPECT_EQ(p.values, (std::vector<double>{1.0, 2.0, 0.0}));
  auto dims_bad = BlockPayload::points(1, 2, {1.0, 2.0});
  EXPECT_THROW(k::kmeans_partial(PayloadView::of(dims_bad), PayloadView::of(cents)), Error);
}

TEST(KMeansTest, PartialMatchesScalarOracle) {
  const std::size_t dims = 12, centers = 20;
  auto blocks = k::gen_points(4, 600, dims, 150);
  BlockPayload cents = k::initial_centroids(blocks, centers);
  ASSERT_EQ(cents.rows, centers);
  // first `centers` points of the dataset
  for (std::size_t i = 0; i < centers * dims; ++i) EXPECT_EQ(cents.values[i], blocks[0].values[i]);
  for (const auto& b : blocks) {
    auto p = k::kmeans_partial(PayloadView::of(b), PayloadView::of(cents));
    auto o = partial_oracle(b.values, b.rows, cents.values, centers, dims);
    EXPECT_EQ(p.counts, o.counts);
    for (std::size_t i = 0; i < o.sums.size(); ++i) {
      EXPECT_TRUE(testing::rel_close(p.values[i], o.sums[i], 1e-12));
    }
  }
}

TEST(KMeansTest, TenIterationsMatchMonolithicLloyd) {
  const std::size_t dims = 6, centers = 20, n = 200;
  auto blocks = k::gen_points(11, n, dims, 32);
  std::vector<double> all = flatten(blocks);
  BlockPayload cents = k::initial_centroids(blocks, centers);
  auto expected = lloyd_oracle(all, n, cents.values, centers, dims, 10);
  for (int it = 0; it < 10; ++it) {
    std::vector<BlockPayload> partials;
    for (const auto& b : blocks) {
      partials.push_back(k::kmeans_partial(PayloadView::of(b), PayloadView::of(cents)));
    }
    cents = k::kmeans_reduce(partials, cents);
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_TRUE(testing::rel_close(cents.values[i], expected[i], 1e-9)) << i;
  }
}

TEST(KMeansTest, EmptyClusterKeepsPreviousCentroid) {
  auto prev = BlockPayload::centroids(2, 2, {0, 0, 100, 100});
  auto pts = BlockPayload::points(2, 2, {1, 1, 3, 3});
  auto p = k::kmeans_partial(PayloadView::of(pts), PayloadView::of(prev));
  std::vector<BlockPayload> parts{p};
  auto next = k::kmeans_reduce(parts, prev);
  EXPECT_EQ(next.values, (std::vector<double>{2, 2, 100, 100}));
}

// ---------------------------------------------------------------------------
// Matrices

TEST(MatrixTest, GenerationAndAssembly) {
  k::MatrixDescriptor d{12, 4};
  auto blocks = k::gen_matrix(9, d);
  ASSERT_EQ(blocks.size(), 9u);
  auto dense = k::assemble(blocks, d);
  ASSERT_EQ(dense.size(), 144u);
  for (std::uint64_t r = 0; r < 3; ++r)
    for (std::uint64_t c = 0; c < 3; ++c) {
      BlockPayload b = k::gen_matrix_block(9, d, r, c);
      EXPECT_TRUE(bit_equal(b, blocks[r * 3 + c]));
      for (std::uint64_t i = 0; i < 4; ++i)
        for (std::uint64_t j = 0; j < 4; ++j)
          EXPECT_EQ(dense[(r * 4 + i) * 12 + c * 4 + j], b.values[i * 4 + j]);
    }
  for (double v : dense) {
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_THROW(k::gen_matrix(9, {10, 4}), Error);
}

TEST(MatrixTest, AddIsBitExact) {
  auto a = k::gen_matrix_block(1, {16, 16}, 0, 0);
  auto b = k::gen_matrix_block(2, {16, 16}, 0, 0);
  auto zero = BlockPayload::submatrix(16, std::vector<double>(256, 0.0));
  auto s = k::matadd_block(PayloadView::of(a), PayloadView::of(b));
  for (std::size_t i = 0; i < 256; ++i) EXPECT_EQ(s.values[i], a.values[i] + b.values[i]);
  EXPECT_TRUE(bit_equal(s, k::matadd_block(PayloadView::of(b), PayloadView::of(a))));
  EXPECT_TRUE(bit_equal(a, k::matadd_block(PayloadView::of(a), PayloadView::of(zero))));
  auto c = k::gen_matrix_block(2, {8, 8}, 0, 0);
  EXPECT_THROW(k::matadd_block(PayloadView::of(a), PayloadView::of(c)), Error);
}

TEST(MatrixTest, ScalarFma) {
  auto r = k::matmul_block(PayloadView::of(BlockPayload::submatrix(1, {2})),
                           PayloadView::of(BlockPayload::submatrix(1, {3})),
                           PayloadView::of(BlockPayload::submatrix(1, {4})));
  EXPECT_EQ(r.values[0], 14.0);
}

TEST(MatrixTest, BlockedProductMatchesNaive) {
  k::MatrixDescriptor d{96, 32};
  auto a = k::gen_matrix(1, d), b = k::gen_matrix(2, d);
  const std::uint64_t g = d.grid(), kk = d.k;
  std::vector<BlockPayload> c;
  for (std::uint64_t i = 0; i < g; ++i)
    for (std::uint64_t j = 0; j < g; ++j) {
      std::vector<double> acc(kk * kk, 0.0);
      for (std::uint64_t t = 0; t < g; ++t) {
        k::matmul_accumulate(acc, a[i * g + t].values, b[t * g + j].values, kk);
      }
      c.push_back(BlockPayload::submatrix(kk, std::move(acc)));
    }
  auto got = k::assemble(c, d);
  auto expected = naive_matmul(k::assemble(a, d), k::assemble(b, d), d.n);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_LE(std::abs(got[i] - expected[i]), 1e-9 * std::max(1.0, std::abs(expected[i])));
  }
}

// ---------------------------------------------------------------------------
// Full application runs

struct AppFixture : ::testing::Test {
  testing::TempDir dir;
  std::unique_ptr<Engine> engine;
  std::unique_ptr<Server> server;
  std::unique_ptr<Session> session;

  void SetUp() override {
    EngineConfig c;
    c.dram_capacity_bytes = 256 << 20;
    c.id_seed = 2;
    c.nvm = ArenaConfig{dir / "nvm.arena", 64 << 20, 0, {}, false};
    c.mm = ArenaConfig{dir / "mm.arena", 64 << 20, 8 << 20, {}, false};
    engine = std::make_unique<Engine>(c, k::default_catalog());
    server = std::make_unique<Server>(*engine);
    session = std::make_unique<Session>(server->connect_loopback());
  }

  static apps::AppParams params(apps::App app) {
    apps::AppParams p;
    p.app = app;
    p.seed = 6;
    p.hist_elements = 40'000;
    p.hist_block_elems = 10'000;
    p.km_points = 400;
    p.km_block_rows = 100;
    p.km.dims = 10;
    p.matrix = {48, 8};
    return p;
  }

  std::vector<std::uint64_t> read_counts(const std::vector<ObjectId>& ids) {
    std::vector<std::uint64_t> out;
    for (const auto& id : ids) out.push_back(engine->object_info(id)->read_count);
    return out;
  }
};

TEST_F(AppFixture, ReadCountsFollowReuse) {
  struct Case {
    apps::App app;
    std::uint64_t reuse;
  };
  for (auto c : {Case{apps::App::kHistogram, 1}, Case{apps::App::kKMeans, 10},
                 Case{apps::App::kMatAdd, 1}, Case{apps::App::kMatMul, 6}}) {
    for (auto mode : {apps::Mode::kActive, apps::Mode::kPassive}) {
      auto p = params(c.app);
      p.mode = mode;
      p.tier = TierKind::kNvmDirect;
      EXPECT_EQ(p.expected_reuse(), c.reuse);
      auto out = apps::run_app(p, *session);
      EXPECT_EQ(out.input_ids.size(), p.input_objects());
      for (auto rc : read_counts(out.input_ids)) EXPECT_EQ(rc, c.reuse) << apps::app_name(c.app);
      EXPECT_EQ(out.method_input_bytes, c.reuse * p.dataset_bytes());
    }
  }
}

TEST_F(AppFixture, MatmulSmallObjectGrid) {
  auto p = params(apps::App::kMatMul);
  p.matrix = {84, 2};  // grid 42
  p.tier = TierKind::kDram;
  auto out = apps::run_app(p, *session);
  for (auto rc : read_counts(out.input_ids)) EXPECT_EQ(rc, 42u);
}

TEST_F(AppFixture, MatAddOutputIsHalfOfInput) {
  for (auto r : {apps::ResultMode::kValue, apps::ResultMode::kVolatile, apps::ResultMode::kStore}) {
    auto p = params(apps::App::kMatAdd);
    p.result = r;
    p.tier = TierKind::kNvmDirect;
    auto out = apps::run_app(p, *session);
    EXPECT_DOUBLE_EQ(static_cast<double>(out.output_bytes) / out.dataset_bytes, 0.5);
  }
}

TEST_F(AppFixture, ActiveAndPassiveAgree) {
  for (auto app : {apps::App::kHistogram, apps::App::kKMeans, apps::App::kMatAdd,
                   apps::App::kMatMul}) {
    auto p = params(app);
    p.tier = TierKind::kMemoryMode;
    p.mode = apps::Mode::kActive;
    auto act = apps::run_app(p, *session);
    p.mode = apps::Mode::kPassive;
    auto pas = apps::run_app(p, *session);
    EXPECT_EQ(act.summary, pas.summary) << apps::app_name(app);
    ASSERT_EQ(act.matrix.size(), pas.matrix.size());
    for (std::size_t i = 0; i < act.matrix.size(); ++i) {
      EXPECT_TRUE(bit_equal(act.matrix[i], pas.matrix[i])) << apps::app_name(app) << " " << i;
    }
  }
}

TEST_F(AppFixture, MatrixResultsMatchOracles) {
  auto p = params(apps::App::kMatMul);
  auto a = k::gen_matrix(p.seed, p.matrix), b = k::gen_matrix(p.seed + 1, p.matrix);
  auto expected = naive_matmul(k::assemble(a, p.matrix), k::assemble(b, p.matrix), p.matrix.n);
  for (auto r : {apps::ResultMode::kValue, apps::ResultMode::kVolatile, apps::ResultMode::kStore,
                 apps::ResultMode::kInPlaceFma}) {
    p.result = r;
    auto out = apps::run_app(p, *session);
    auto got = k::assemble(out.matrix, p.matrix);
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_LE(std::abs(got[i] - expected[i]), 1e-9 * std::max(1.0, std::abs(expected[i])));
    }
  }
  auto add = params(apps::App::kMatAdd);
  auto out = apps::run_app(add, *session);
  for (std::size_t i = 0; i < out.matrix.size(); ++i) {
    for (std::size_t j = 0; j < out.matrix[i].values.size(); ++j) {
      ASSERT_EQ(out.matrix[i].values[j], a[i].values[j] + b[i].values[j]);
    }
  }
}

TEST_F(AppFixture, HistogramSummaryMatchesOracle) {
  auto p = params(apps::App::kHistogram);
  auto out = apps::run_app(p, *session);
  std::vector<double> all;
  for (const auto& b : k::gen_f_array(p.seed, p.hist_elements, k::kFDistD1, k::kFDistD2,
                                      p.hist_block_elems)) {
    all.insert(all.end(), b.values.begin(), b.values.end());
  }
  EXPECT_EQ(out.summary.counts, histogram_oracle(all, k::HistogramSpec::standard().edges));
}

TEST_F(AppFixture, InvalidCombinationsRejected) {
  auto p = params(apps::App::kMatAdd);
  p.result = apps::ResultMode::kInPlaceFma;
  EXPECT_THROW(p.validate(), Error);
  p = params(apps::App::kMatMul);
  p.result = apps::ResultMode::kInPlaceFma;
  p.mode = apps::Mode::kPassive;
  EXPECT_THROW(p.validate(), Error);
  p = params(apps::App::kHistogram);
  p.result = apps::ResultMode::kStore;
  EXPECT_THROW(p.validate(), Error);
}

TEST(ProfileTest, SizesFollowProfiles) {
  auto h = apps::AppParams::profile(apps::App::kHistogram, apps::DatasetSize::kSmall,
                                    apps::ObjectSize::kBig);
  EXPECT_EQ(h.dataset_bytes(), 256 * apps::kMiB);
  EXPECT_EQ(h.input_objects(), 32u);
  auto km = apps::AppParams::profile(apps::App::kKMeans, apps::DatasetSize::kSmall,
                                     apps::ObjectSize::kBig);
  EXPECT_EQ(km.km_block_rows, (8 * apps::kMiB) / (500 * 8));
  EXPECT_EQ(km.input_objects(), 32u);
  auto mm = apps::AppParams::profile(apps::App::kMatMul, apps::DatasetSize::kSmall,
                                     apps::ObjectSize::kSmall);
  EXPECT_EQ(mm.matrix.grid(), 42u);
  EXPECT_EQ(mm.expected_reuse(), 42u);
}

}  // namespace
}  // namespace aos
