#include "aos/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "aos/error.hpp"

namespace aos::kernels {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, stream, index).
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ (stream * 0xd1b54a32d192ed03ULL)) + index));
}

// 53-bit uniform in [0, 1); never rounds up to 1.
double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

void require_kind(const PayloadView& v, PayloadKind kind, const char* role) {
  require(v.kind == kind, ErrorCode::kInvalidArgument,
          std::string(role) + " must be " + std::string(payload_kind_name(kind)) + ", got " +
              std::string(payload_kind_name(v.kind)));
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t HistogramSpec::bin_of(double x) const {
  return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) -
                                  edges.begin());
}

void HistogramSpec::validate() const {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    require(std::isfinite(edges[i]) && edges[i] > 0.0, ErrorCode::kInvalidArgument,
            "histogram edges must be finite and positive");
    require(i == 0 || edges[i - 1] < edges[i], ErrorCode::kInvalidArgument,
            "histogram edges must be strictly increasing");
  }
}

const HistogramSpec& HistogramSpec::standard() {
  static const HistogramSpec spec = [] {
    HistogramSpec s;
    constexpr int kEdges = kHistogramBins - 1;
    s.edges.reserve(kEdges);
    for (int i = 0; i < kEdges; ++i) {
      s.edges.push_back(std::exp2(-7.0 + 13.0 * i / (kEdges - 1)));
    }
    return s;
  }();
  return spec;
}

BlockPayload gen_f_block(std::uint64_t seed, std::uint64_t n, double d1, double d2,
                         std::uint64_t block_elems, std::uint64_t b) {
  require(n > 0 && block_elems > 0, ErrorCode::kInvalidArgument,
          "gen_f_array: n and block_elems must be positive");
  require(b * block_elems < n, ErrorCode::kInvalidArgument, "gen_f_array: block out of range");
  std::uint64_t len = std::min(block_elems, n - b * block_elems);
  auto rng = stream_rng(seed, 1, b);
  std::chi_squared_distribution<double> num(d1);
  std::chi_squared_distribution<double> den(d2);
  std::vector<double> values(len);
  for (auto& v : values) {
    double x1 = num(rng);
    double x2 = den(rng);
    v = (x1 / d1) / (x2 / d2);
  }
  return BlockPayload::float_array(std::move(values));
}

std::vector<BlockPayload> gen_f_array(std::uint64_t seed, std::uint64_t n, double d1, double d2,
                                      std::uint64_t block_elems) {
  require(n > 0 && block_elems > 0, ErrorCode::kInvalidArgument,
          "gen_f_array: n and block_elems must be positive");
  std::vector<BlockPayload> blocks;
  std::uint64_t nblocks = (n + block_elems - 1) / block_elems;
  blocks.reserve(nblocks);
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    blocks.push_back(gen_f_block(seed, n, d1, d2, block_elems, b));
  }
  return blocks;
}

BlockPayload histogram_block(std::span<const double> block, const HistogramSpec& spec) {
  std::vector<std::uint64_t> counts(spec.bin_count(), 0);
  for (double x : block) {
    if (std::isnan(x)) throw Error(ErrorCode::kInvalidArgument, "histogram input contains NaN");
    if (x < 0.0) throw Error(ErrorCode::kInvalidArgument, "histogram input is negative");
    ++counts[spec.bin_of(x)];
  }
  return BlockPayload::histogram(std::move(counts));
}

BlockPayload merge_histograms(std::span<const BlockPayload> parts) {
  require(!parts.empty(), ErrorCode::kInvalidArgument, "merge_histograms: no inputs");
  std::vector<std::uint64_t> total(parts.front().counts.size(), 0);
  for (const auto& p : parts) {
    require(p.kind == PayloadKind::kHistogram && p.counts.size() == total.size(),
            ErrorCode::kInvalidArgument, "merge_histograms: length mismatch");
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += p.counts[i];
  }
  return BlockPayload::histogram(std::move(total));
}

// ---------------------------------------------------------------------------

void KMeansSpec::validate() const {
  require(centers >= 1 && iterations >= 1 && dims >= 1, ErrorCode::kInvalidArgument,
          "k-means needs centers, iterations and dims >= 1");
}

BlockPayload gen_points_block(std::uint64_t seed, std::uint64_t n_points, std::uint64_t dims,
                              std::uint64_t block_rows, std::uint64_t b) {
  require(n_points > 0 && dims > 0 && block_rows > 0, ErrorCode::kInvalidArgument,
          "gen_points: sizes must be positive");
  require(b * block_rows < n_points, ErrorCode::kInvalidArgument, "gen_points: block out of range");
  std::uint64_t rows = std::min(block_rows, n_points - b * block_rows);
  auto rng = stream_rng(seed, 2, b);
  std::vector<double> values(rows * dims);
  for (auto& v : values) v = unit(rng);
  return BlockPayload::points(rows, dims, std::move(values));
}

std::vector<BlockPayload> gen_points(std::uint64_t seed, std::uint64_t n_points,
                                     std::uint64_t dims, std::uint64_t block_rows) {
  require(n_points > 0 && dims > 0 && block_rows > 0, ErrorCode::kInvalidArgument,
          "gen_points: sizes must be positive");
  std::vector<BlockPayload> blocks;
  std::uint64_t nblocks = (n_points + block_rows - 1) / block_rows;
  blocks.reserve(nblocks);
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    blocks.push_back(gen_points_block(seed, n_points, dims, block_rows, b));
  }
  return blocks;
}

BlockPayload initial_centroids(std::span<const BlockPayload> blocks, std::uint64_t centers) {
  require(!blocks.empty(), ErrorCode::kInvalidArgument, "initial_centroids: no points");
  std::uint64_t dims = blocks.front().cols;
  std::vector<double> values;
  values.reserve(centers * dims);
  for (const auto& b : blocks) {
    for (std::uint64_t r = 0; r < b.rows && values.size() < centers * dims; ++r) {
      values.insert(values.end(), b.values.begin() + r * dims, b.values.begin() + (r + 1) * dims);
    }
  }
  require(values.size() == centers * dims, ErrorCode::kInvalidArgument,
          "initial_centroids: fewer points than centers");
  return BlockPayload::centroids(centers, dims, std::move(values));
}

BlockPayload kmeans_partial(const PayloadView& block, const PayloadView& centroids) {
  require_kind(block, PayloadKind::kPointsBlock, "k-means block");
  require_kind(centroids, PayloadKind::kCentroids, "k-means centroids");
  require(block.cols == centroids.cols, ErrorCode::kInvalidArgument,
          "k-means dims mismatch: points " + std::to_string(block.cols) + ", centroids " +
              std::to_string(centroids.cols));
  const std::uint64_t dims = block.cols;
  const std::uint64_t k = centroids.rows;
  std::vector<double> sums(k * dims, 0.0);
  std::vector<std::uint64_t> counts(k, 0);
  for (std::uint64_t r = 0; r < block.rows; ++r) {
    const double* p = block.values.data() + r * dims;
    std::uint64_t best = 0;
    double best_d = 0.0;
    for (std::uint64_t j = 0; j < k; ++j) {
      const double* c = centroids.values.data() + j * dims;
      double d = 0.0;
      for (std::uint64_t t = 0; t < dims; ++t) {
        double diff = p[t] - c[t];
        d += diff * diff;
      }
      if (std::isnan(d)) throw Error(ErrorCode::kInvalidArgument, "k-means input contains NaN");
      if (j == 0 || d < best_d) {
        best = j;
        best_d = d;
      }
    }
    double* s = sums.data() + best * dims;
    for (std::uint64_t t = 0; t < dims; ++t) s[t] += p[t];
    ++counts[best];
  }
  return BlockPayload::partial_sum(k, dims, std::move(sums), std::move(counts));
}

BlockPayload kmeans_reduce(std::span<const BlockPayload> partials, const BlockPayload& previous) {
  require(previous.kind == PayloadKind::kCentroids, ErrorCode::kInvalidArgument,
          "kmeans_reduce: previous must be Centroids");
  const std::uint64_t k = previous.rows;
  const std::uint64_t dims = previous.cols;
  std::vector<double> sums(k * dims, 0.0);
  std::vector<std::uint64_t> counts(k, 0);
  for (const auto& p : partials) {
    require(p.kind == PayloadKind::kPartialSum && p.rows == k && p.cols == dims,
            ErrorCode::kInvalidArgument, "kmeans_reduce: shape mismatch");
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += p.values[i];
    for (std::size_t j = 0; j < k; ++j) counts[j] += p.counts[j];
  }
  std::vector<double> next = previous.values;
  for (std::uint64_t j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    double n = static_cast<double>(counts[j]);
    for (std::uint64_t t = 0; t < dims; ++t) next[j * dims + t] = sums[j * dims + t] / n;
  }
  return BlockPayload::centroids(k, dims, std::move(next));
}

// ---------------------------------------------------------------------------

void MatrixDescriptor::validate() const {
  require(n > 0 && k > 0 && n % k == 0, ErrorCode::kInvalidArgument,
          "matrix side " + std::to_string(n) + " is not divisible by block side " +
              std::to_string(k));
}

BlockPayload gen_matrix_block(std::uint64_t seed, const MatrixDescriptor& desc,
                              std::uint64_t row, std::uint64_t col) {
  desc.validate();
  auto rng = stream_rng(seed, 3, row * desc.grid() + col);
  std::vector<double> values(desc.k * desc.k);
  for (auto& v : values) v = 2.0 * unit(rng) - 1.0;
  return BlockPayload::submatrix(desc.k, std::move(values));
}

std::vector<BlockPayload> gen_matrix(std::uint64_t seed, const MatrixDescriptor& desc) {
  desc.validate();
  std::vector<BlockPayload> blocks;
  blocks.reserve(desc.grid() * desc.grid());
  for (std::uint64_t r = 0; r < desc.grid(); ++r) {
    for (std::uint64_t c = 0; c < desc.grid(); ++c) {
      blocks.push_back(gen_matrix_block(seed, desc, r, c));
    }
  }
  return blocks;
}

std::vector<double> assemble(std::span<const BlockPayload> blocks, const MatrixDescriptor& desc) {
  desc.validate();
  const std::uint64_t g = desc.grid();
  const std::uint64_t k = desc.k;
  require(blocks.size() == g * g, ErrorCode::kInvalidArgument, "assemble: wrong block count");
  std::vector<double> dense(desc.n * desc.n);
  for (std::uint64_t br = 0; br < g; ++br) {
    for (std::uint64_t bc = 0; bc < g; ++bc) {
      const auto& b = blocks[br * g + bc];
      require(b.kind == PayloadKind::kSubmatrix && b.rows == k, ErrorCode::kInvalidArgument,
              "assemble: block shape mismatch");
      for (std::uint64_t i = 0; i < k; ++i) {
        std::copy_n(b.values.begin() + i * k, k,
                    dense.begin() + (br * k + i) * desc.n + bc * k);
      }
    }
  }
  return dense;
}

BlockPayload matadd_block(const PayloadView& a, const PayloadView& b) {
  require_kind(a, PayloadKind::kSubmatrix, "matadd lhs");
  require_kind(b, PayloadKind::kSubmatrix, "matadd rhs");
  require(a.rows == b.rows, ErrorCode::kInvalidArgument, "matadd shape mismatch");
  std::vector<double> out(a.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values[i] + b.values[i];
  return BlockPayload::submatrix(a.rows, std::move(out));
}

void matmul_accumulate(std::span<double> acc, std::span<const double> a,
                       std::span<const double> b, std::uint64_t k) {
  require(acc.size() == k * k && a.size() == k * k && b.size() == k * k,
          ErrorCode::kInvalidArgument, "matmul shape mismatch");
  // i-t-j order: each acc[i,j] receives its terms in ascending t.
  for (std::uint64_t i = 0; i < k; ++i) {
    double* out = acc.data() + i * k;
    for (std::uint64_t t = 0; t < k; ++t) {
      const double s = a[i * k + t];
      const double* row = b.data() + t * k;
      for (std::uint64_t j = 0; j < k; ++j) out[j] += s * row[j];
    }
  }
}

BlockPayload matmul_block(const PayloadView& acc, const PayloadView& a, const PayloadView& b) {
  require_kind(acc, PayloadKind::kSubmatrix, "fma accumulator");
  require_kind(a, PayloadKind::kSubmatrix, "fma lhs");
  require_kind(b, PayloadKind::kSubmatrix, "fma rhs");
  require(acc.rows == a.rows && a.rows == b.rows, ErrorCode::kInvalidArgument,
          "fma shape mismatch");
  std::vector<double> out(acc.values.begin(), acc.values.end());
  matmul_accumulate(out, a.values, b.values, a.rows);
  return BlockPayload::submatrix(a.rows, std::move(out));
}

BlockPayload mean(const PayloadView& values) {
  require_kind(values, PayloadKind::kFloatArray, "mean input");
  require(!values.values.empty(), ErrorCode::kInvalidArgument, "mean of empty array");
  double s = 0.0;
  for (double v : values.values) s += v;
  return BlockPayload::float_array({s / static_cast<double>(values.values.size())});
}

// ---------------------------------------------------------------------------

RoutineCatalog default_catalog() {
  RoutineCatalog c;
  c.add(routine::kMean, [](const PayloadView& target, std::span<const PayloadView>) {
    return mean(target);
  });
  c.add(routine::kHistogram, [](const PayloadView& target, std::span<const PayloadView>) {
    require_kind(target, PayloadKind::kFloatArray, "histogram input");
    return histogram_block(target.values, HistogramSpec::standard());
  });
  c.add(routine::kKMeansPartial, [](const PayloadView& target, std::span<const PayloadView> args) {
    require(args.size() == 1, ErrorCode::kInvalidArgument, "kmeans.partial takes centroids");
    return kmeans_partial(target, args[0]);
  });
  c.add(routine::kMatAdd, [](const PayloadView& target, std::span<const PayloadView> args) {
    require(args.size() == 1, ErrorCode::kInvalidArgument, "matrix.add takes one operand");
    return matadd_block(target, args[0]);
  });
  c.add(routine::kFma, [](const PayloadView& target, std::span<const PayloadView> args) {
    require(args.size() == 2, ErrorCode::kInvalidArgument, "matrix.fma takes (b, acc)");
    return matmul_block(args[1], target, args[0]);
  });
  c.add_mutating(routine::kFmaInPlace, [](MutablePayloadView acc, std::span<const PayloadView> args) {
    require(args.size() == 2, ErrorCode::kInvalidArgument, "matrix.fma_in_place takes (a, b)");
    require(acc.kind == PayloadKind::kSubmatrix, ErrorCode::kInvalidArgument,
            "fma accumulator must be a Submatrix");
    require_kind(args[0], PayloadKind::kSubmatrix, "fma lhs");
    require_kind(args[1], PayloadKind::kSubmatrix, "fma rhs");
    require(args[0].rows == acc.rows && args[1].rows == acc.rows, ErrorCode::kInvalidArgument,
            "fma shape mismatch");
    matmul_accumulate(acc.values, args[0].values, args[1].values, acc.rows);
  });
  return c;
}

}  // namespace aos::kernels
