// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "aos/apps.hpp"
#include "aos/bench.hpp"
#include "aos/client.hpp"
#include "aos/kernels.hpp"
#include "aos/server.hpp"
#include "aos/wire.hpp"
#include "test_util.hpp"

namespace {

using namespace aos;
namespace k = aos::kernels;
using nlohmann::json;

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      if (!pass) detail << "; ";
      else detail.str("");
      pass = false;
      detail << what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool rel_close(double a, double b, double tol) { return aos::testing::rel_close(a, b, tol); }

// ---------------------------------------------------------------------------
// A store over loopback with every tier open.

struct Store {
  aos::testing::TempDir dir;
  EngineConfig config;
  std::unique_ptr<Engine> engine;
  std::unique_ptr<Server> server;
  std::unique_ptr<Session> session;

  explicit Store(std::uint64_t arena_bytes = 256 * apps::kMiB,
                 std::uint64_t cache_bytes = 64 * apps::kMiB) {
    config.dram_capacity_bytes = 1ULL << 30;
    config.id_seed = 1;
    config.nvm = ArenaConfig{dir / "nvm.arena", arena_bytes, 0, {}, false};
    config.mm = ArenaConfig{dir / "mm.arena", arena_bytes, cache_bytes, {}, false};
    open();
  }

  void open() {
    engine = std::make_unique<Engine>(config, k::default_catalog());
    server = std::make_unique<Server>(*engine);
    session = std::make_unique<Session>(server->connect_loopback());
  }

  void close() {
    session.reset();
    server.reset();
    engine.reset();
  }
};

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

std::vector<double> lloyd_oracle(const std::vector<double>& pts, std::size_t n,
                                 std::vector<double> cents, std::size_t centers, std::size_t dims,
                                 int iterations) {
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> sums(centers * dims, 0.0);
    std::vector<std::uint64_t> counts(centers, 0);
    for (std::size_t r = 0; r < n; ++r) {
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
      counts[best] += 1;
      for (std::size_t j = 0; j < dims; ++j) sums[best * dims + j] += pts[r * dims + j];
    }
    for (std::size_t c = 0; c < centers; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dims; ++j) {
        cents[c * dims + j] = sums[c * dims + j] / static_cast<double>(counts[c]);
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

// Frame sizes from the wire layout: 13-byte header; INVOKE body is
// id(16) + name(u32 + bytes) + placement(2) + argc(u32) + args, inline args
// are tag(1) + len(u64) + payload; results are tag(1) + payload.
// Payload headers: 9 bytes for 1-D kinds, 17 for 2-D kinds.
constexpr std::uint64_t kHeader = 13;
std::uint64_t invoke_request_frame(std::uint64_t name_len, std::uint64_t inline_payload_bytes,
                                   bool has_inline) {
  std::uint64_t body = 16 + 4 + name_len + 2 + 4;
  if (has_inline) body += 1 + 8 + inline_payload_bytes;
  return kHeader + body;
}
std::uint64_t invoke_value_reply_frame(std::uint64_t payload_bytes) {
  return kHeader + 1 + payload_bytes;
}
std::uint64_t get_request_frame() { return kHeader + 16; }
std::uint64_t get_reply_frame(std::uint64_t payload_bytes) { return kHeader + payload_bytes; }

// ---------------------------------------------------------------------------
// Benchmark runs shared between criteria.

std::deque<bench::BenchmarkReport> g_reports;
std::map<std::string, std::size_t> g_report_index;

bench::BenchmarkConfig make_config(apps::App app, apps::Mode mode, TierKind tier,
                                   apps::DatasetSize dataset = apps::DatasetSize::kDesk,
                                   apps::ObjectSize objects = apps::ObjectSize::kBig,
                                   apps::ResultMode result = apps::ResultMode::kValue) {
  bench::BenchmarkConfig c;
  c.app = app;
  c.mode = mode;
  c.tier = tier;
  c.dataset = dataset;
  c.objects = objects;
  c.result = result;
  c.seed = 42;
  return c;
}

const bench::BenchmarkReport& run(const bench::BenchmarkConfig& c) {
  std::string key = bench::config_to_json(c).dump();
  auto it = g_report_index.find(key);
  if (it != g_report_index.end()) return g_reports[it->second];
  bench::BenchmarkReport r = bench::run_benchmark(c);
  if (r.status != "ok") throw Error(ErrorCode::kInternal, "run failed: " + r.error);
  g_reports.push_back(std::move(r));
  g_report_index[key] = g_reports.size() - 1;
  return g_reports.back();
}

bool same_outcome(const apps::AppOutcome& a, const apps::AppOutcome& b, double tol) {
  if (a.summary.kind != b.summary.kind || a.summary.counts != b.summary.counts) return false;
  if (a.summary.values.size() != b.summary.values.size()) return false;
  for (std::size_t i = 0; i < a.summary.values.size(); ++i) {
    if (!rel_close(a.summary.values[i], b.summary.values[i], tol)) return false;
  }
  if (a.matrix.size() != b.matrix.size()) return false;
  for (std::size_t m = 0; m < a.matrix.size(); ++m) {
    if (a.matrix[m].values.size() != b.matrix[m].values.size()) return false;
    for (std::size_t i = 0; i < a.matrix[m].values.size(); ++i) {
      if (!rel_close(a.matrix[m].values[i], b.matrix[m].values[i], tol)) return false;
    }
  }
  return true;
}

constexpr apps::App kApps[] = {apps::App::kHistogram, apps::App::kKMeans, apps::App::kMatAdd,
                               apps::App::kMatMul};
constexpr TierKind kTiers[] = {TierKind::kDram, TierKind::kNvmDirect, TierKind::kMemoryMode};

// ---------------------------------------------------------------------------
// Criteria

void kernel_correctness(Check& c) {
  // Histogram, n = 10^6 in 1 MiB blocks.
  {
    const std::uint64_t n = 1'000'000;
    const auto& spec = k::HistogramSpec::standard();
    auto blocks = k::gen_f_array(7, n, k::kFDistD1, k::kFDistD2, 131072);
    std::vector<BlockPayload> parts;
    std::vector<double> all;
    for (const auto& b : blocks) {
      parts.push_back(k::histogram_block(b.values, spec));
      all.insert(all.end(), b.values.begin(), b.values.end());
    }
    auto merged = k::merge_histograms(parts);
    std::uint64_t total = 0;
    for (auto x : merged.counts) total += x;
    c.expect(merged.counts == histogram_oracle(all, spec.edges), "histogram != oracle");
    c.expect(total == n, "histogram total != n");
  }
  // k-means through the store, 10^4 points of 500 dims.
  {
    Store st;
    apps::register_kernel_classes(*st.session);
    apps::AppParams p;
    p.app = apps::App::kKMeans;
    p.seed = 8;
    p.km_points = 10'000;
    p.km_block_rows = 2097;
    p.tier = TierKind::kNvmDirect;
    auto out = apps::run_app(p, *st.session);
    auto blocks = k::gen_points(p.seed, p.km_points, p.km.dims, p.km_block_rows);
    std::vector<double> all;
    for (const auto& b : blocks) all.insert(all.end(), b.values.begin(), b.values.end());
    std::vector<double> init(all.begin(), all.begin() + p.km.centers * p.km.dims);
    auto expected = lloyd_oracle(all, p.km_points, init, p.km.centers, p.km.dims, 10);
    bool ok = out.summary.values.size() == expected.size();
    for (std::size_t i = 0; ok && i < expected.size(); ++i) {
      ok = rel_close(out.summary.values[i], expected[i], 1e-9);
    }
    c.expect(ok, "k-means centroids differ from Lloyd oracle");
  }
  // Matrix add, n = 2016, k in {336, 48}.
  for (std::uint64_t kk : {336u, 48u}) {
    Store st;
    apps::register_kernel_classes(*st.session);
    apps::AppParams p;
    p.app = apps::App::kMatAdd;
    p.seed = 9;
    p.tier = TierKind::kNvmDirect;
    p.matrix = {2016, kk};
    auto out = apps::run_app(p, *st.session);
    auto a = k::assemble(k::gen_matrix(p.seed, p.matrix), p.matrix);
    auto b = k::assemble(k::gen_matrix(p.seed + 1, p.matrix), p.matrix);
    auto got = k::assemble(out.matrix, p.matrix);
    bool ok = got.size() == a.size();
    for (std::size_t i = 0; ok && i < a.size(); ++i) ok = got[i] == a[i] + b[i];
    c.expect(ok, "matadd k=" + std::to_string(kk) + " not bit-equal");
  }
  // Matrix multiply, n = 96, k = 32.
  {
    Store st;
    apps::register_kernel_classes(*st.session);
    apps::AppParams p;
    p.app = apps::App::kMatMul;
    p.seed = 10;
    p.matrix = {96, 32};
    p.tier = TierKind::kNvmDirect;
    auto by_value = apps::run_app(p, *st.session);
    p.result = apps::ResultMode::kInPlaceFma;
    auto in_place = apps::run_app(p, *st.session);
    auto expected = naive_matmul(k::assemble(k::gen_matrix(p.seed, p.matrix), p.matrix),
                                 k::assemble(k::gen_matrix(p.seed + 1, p.matrix), p.matrix), 96);
    auto got = k::assemble(by_value.matrix, p.matrix);
    auto got_ip = k::assemble(in_place.matrix, p.matrix);
    bool ok = got.size() == expected.size() && got_ip.size() == expected.size();
    bool ok_ip = ok;
    for (std::size_t i = 0; ok && i < got.size(); ++i) {
      ok = std::abs(got[i] - expected[i]) <= 1e-9 * std::max(1.0, std::abs(expected[i]));
    }
    for (std::size_t i = 0; ok_ip && i < got.size(); ++i) {
      ok_ip = std::abs(got_ip[i] - got[i]) <= 1e-12 * std::max(1.0, std::abs(got[i]));
    }
    c.expect(ok, "matmul differs from naive oracle");
    c.expect(ok_ip, "in-place FMA differs from by-value result");
  }
  if (c.pass) c.detail << "histogram n=1e6, k-means 1e4x500, matadd 2016/{336,48}, matmul 96/32";
}

void active_passive_equivalence(Check& c) {
  int runs = 0;
  for (auto app : kApps) {
    for (auto tier : kTiers) {
      const auto& act = run(make_config(app, apps::Mode::kActive, tier));
      const auto& pas = run(make_config(app, apps::Mode::kPassive, tier));
      c.expect(same_outcome(*act.outcome, *pas.outcome, 1e-9),
               std::string(apps::app_name(app)) + "/" + std::string(tier_kind_name(tier)) +
                   " active != passive");
      runs += 2;
    }
  }
  if (c.pass) c.detail << runs << " desk runs, 4 apps x 3 tiers";
}

void reuse_counters(Check& c) {
  struct Case {
    apps::App app;
    apps::ObjectSize objects;
    std::uint64_t reuse;
  };
  for (auto cs : {Case{apps::App::kHistogram, apps::ObjectSize::kBig, 1},
                  Case{apps::App::kMatAdd, apps::ObjectSize::kBig, 1},
                  Case{apps::App::kKMeans, apps::ObjectSize::kBig, 10},
                  Case{apps::App::kMatMul, apps::ObjectSize::kBig, 6},
                  Case{apps::App::kMatMul, apps::ObjectSize::kSmall, 42}}) {
    for (auto mode : {apps::Mode::kActive, apps::Mode::kPassive}) {
      const auto& r = run(make_config(cs.app, mode, TierKind::kDram, apps::DatasetSize::kDesk,
                                      cs.objects));
      std::map<std::uint64_t, std::uint64_t> expected{{cs.reuse, r.input_objects}};
      c.expect(r.input_objects > 0 && r.read_counts == expected,
               std::string(apps::app_name(cs.app)) + " read_count != " +
                   std::to_string(cs.reuse));
    }
  }
  if (c.pass) c.detail << "histogram 1, matadd 1, k-means 10, matmul grid6 6, grid42 42";
}

void output_size_ratio(Check& c) {
  for (auto app : {apps::App::kMatAdd, apps::App::kMatMul}) {
    for (auto result : {apps::ResultMode::kValue, apps::ResultMode::kVolatile,
                        apps::ResultMode::kStore}) {
      const auto& r = run(make_config(app, apps::Mode::kActive, TierKind::kNvmDirect,
                                      apps::DatasetSize::kDesk, apps::ObjectSize::kBig, result));
      c.expect(2 * r.output_bytes == r.dataset_bytes,
               std::string(apps::app_name(app)) + " output ratio != 0.5");
    }
  }
  for (auto app : {apps::App::kHistogram, apps::App::kKMeans}) {
    const auto& desk = run(make_config(app, apps::Mode::kActive, TierKind::kDram));
    const auto& small = run(make_config(app, apps::Mode::kActive, TierKind::kDram,
                                        apps::DatasetSize::kSmall));
    std::uint64_t expected = app == apps::App::kHistogram ? 140 * 8 : 80'000;
    c.expect(desk.output_bytes == expected && small.output_bytes == expected,
             std::string(apps::app_name(app)) + " output not constant " +
                 std::to_string(desk.output_bytes) + "/" + std::to_string(small.output_bytes));
  }
  if (c.pass) c.detail << "matrix 0.5 exactly; histogram 1120 B, k-means 80000 B at 16 and 256 MiB";
}

void data_movement_law(Check& c) {
  const std::uint64_t blocks = 32;
  const std::uint64_t block_bytes = 8 * apps::kMiB;
  const std::uint64_t iterations = 10;
  const std::uint64_t km_rows = block_bytes / (500 * 8);
  const std::uint64_t km_block_bytes = km_rows * 500 * 8;
  const std::uint64_t hist_payload = 9 + 140 * 8;
  const std::uint64_t centroid_payload = 17 + 20 * 500 * 8;
  const std::uint64_t partial_payload = 17 + 20 * 500 * 8 + 20 * 8;

  // Predictions, fixed before any run.
  const std::uint64_t hist_act_sent = blocks * invoke_request_frame(9, 0, false);
  const std::uint64_t hist_act_recv = blocks * invoke_value_reply_frame(hist_payload);
  const std::uint64_t hist_pas_sent = blocks * get_request_frame();
  const std::uint64_t hist_pas_recv = blocks * get_reply_frame(9 + block_bytes);
  const std::uint64_t calls = iterations * blocks;
  const std::uint64_t km_act_sent = calls * invoke_request_frame(7, centroid_payload, true);
  const std::uint64_t km_act_recv = calls * invoke_value_reply_frame(partial_payload);
  const std::uint64_t km_pas_sent = calls * get_request_frame();
  const std::uint64_t km_pas_recv = calls * get_reply_frame(17 + km_block_bytes);

  const double hist_limit = 0.001 * static_cast<double>(256 * apps::kMiB);
  const double km_ratio_limit = 0.002;

  auto cfg = [](apps::App app, apps::Mode mode) {
    return make_config(app, mode, TierKind::kDram, apps::DatasetSize::kSmall,
                       apps::ObjectSize::kBig);
  };
  const auto& ha = run(cfg(apps::App::kHistogram, apps::Mode::kActive));
  const auto& hp = run(cfg(apps::App::kHistogram, apps::Mode::kPassive));
  const auto& ka = run(cfg(apps::App::kKMeans, apps::Mode::kActive));
  const auto& kp = run(cfg(apps::App::kKMeans, apps::Mode::kPassive));

  c.expect(ha.compute_wire.bytes_sent == hist_act_sent &&
               ha.compute_wire.bytes_received == hist_act_recv,
           "active histogram bytes differ from prediction");
  c.expect(hp.compute_wire.bytes_sent == hist_pas_sent &&
               hp.compute_wire.bytes_received == hist_pas_recv,
           "passive histogram bytes differ from prediction");
  c.expect(ka.compute_wire.bytes_sent == km_act_sent &&
               ka.compute_wire.bytes_received == km_act_recv,
           "active k-means bytes differ from prediction");
  c.expect(kp.compute_wire.bytes_sent == km_pas_sent &&
               kp.compute_wire.bytes_received == km_pas_recv,
           "passive k-means bytes differ from prediction");

  const std::uint64_t hist_active = ha.compute_wire.bytes_sent + ha.compute_wire.bytes_received;
  const std::uint64_t km_active = ka.compute_wire.bytes_sent + ka.compute_wire.bytes_received;
  c.expect(hp.compute_wire.bytes_received >= 256 * apps::kMiB,
           "passive histogram < 256 MiB");
  c.expect(static_cast<double>(hist_active) <= hist_limit, "active histogram > 0.1% of 256 MiB");
  c.expect(kp.compute_wire.bytes_received >= iterations * kp.dataset_bytes &&
               kp.compute_wire.bytes_received >= iterations * 256'000'000ULL,
           "passive k-means < 10 x dataset");
  const double km_ratio =
      static_cast<double>(km_active) / static_cast<double>(kp.compute_wire.bytes_received);
  c.expect(km_ratio <= km_ratio_limit,
           "active k-means is " + fmt("%.3f", 100 * km_ratio) + "% of passive (limit 0.2%; " +
               std::to_string(km_active) + " B = " + std::to_string(calls) +
               " x (80 kB centroids in + 80 kB partial sums out))");
  if (c.pass) {
    c.detail << "histogram " << hist_active << " B vs " << hp.compute_wire.bytes_received
             << " B; k-means ratio " << fmt("%.4f", km_ratio);
  } else {
    c.detail << " | histogram active " << hist_active << " B <= " << fmt("%.0f", hist_limit)
             << " B, passive " << hp.compute_wire.bytes_received << " B; all byte counts"
             << " equal their predictions";
  }
}

void persistence(Check& c) {
  auto t0 = std::chrono::steady_clock::now();
  Store st;
  apps::register_kernel_classes(*st.session);
  std::mt19937_64 rng(12);
  std::vector<std::pair<ObjectId, Bytes>> nvm;
  std::vector<ObjectId> volatile_ids;
  for (int i = 0; i < 200; ++i) {
    BlockPayload p = aos::testing::random_payload(rng);
    nvm.emplace_back(st.session->make_persistent("FloatArray", p, TierKind::kNvmDirect),
                     encode_payload(p));
    volatile_ids.push_back(st.session->make_persistent("FloatArray", p, TierKind::kMemoryMode));
    volatile_ids.push_back(st.session->make_persistent("FloatArray", p, TierKind::kDram));
  }
  // Delete a few so the directory has holes.
  for (int i = 0; i < 200; i += 7) st.session->delete_object(nvm[i].first);
  st.session->flush();
  st.close();
  st.open();
  std::size_t survived = 0, expected_alive = 0, lost = 0;
  for (std::size_t i = 0; i < nvm.size(); ++i) {
    bool deleted = i % 7 == 0;
    expected_alive += !deleted;
    try {
      Bytes got = st.engine->get_encoded(nvm[i].first);
      survived += !deleted && got == nvm[i].second;
    } catch (const Error& e) {
      c.expect(deleted && e.code() == ErrorCode::kNotFound, "NVM object missing after restart");
    }
  }
  for (const auto& id : volatile_ids) {
    try {
      st.session->fetch_full(id);
    } catch (const Error& e) {
      lost += e.code() == ErrorCode::kNotFound;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(survived == expected_alive, "NVM objects not byte-identical after restart");
  c.expect(lost == volatile_ids.size(), "MEMORY_MODE/DRAM objects survived restart");
  c.expect(secs < 10.0, "runtime " + fmt("%.1f", secs) + " s");
  if (c.pass) {
    c.detail << survived << " NVM objects identical, " << lost << " volatile objects gone, "
             << fmt("%.2f", secs) << " s";
  }
}

std::uint64_t second_sweep_nvm_reads(std::uint64_t cache_bytes) {
  Store st(64 * apps::kMiB, cache_bytes);
  apps::register_kernel_classes(*st.session);
  std::vector<ObjectId> ids;
  for (const auto& b : k::gen_f_array(3, 16 * 131072, k::kFDistD1, k::kFDistD2, 131072)) {
    ids.push_back(st.session->make_persistent("FloatArray", b, TierKind::kMemoryMode));
  }
  for (const auto& id : ids) st.session->invoke(id, "histogram");
  TierCounters before = st.engine->tier(TierKind::kMemoryMode).counters();
  for (const auto& id : ids) st.session->invoke(id, "histogram");
  TierCounters after = st.engine->tier(TierKind::kMemoryMode).counters();
  return after.bytes_read - before.bytes_read;
}

void memory_mode_cache(Check& c) {
  std::uint64_t small = second_sweep_nvm_reads(8 * apps::kMiB);
  std::uint64_t large = second_sweep_nvm_reads(32 * apps::kMiB);
  c.expect(small > 0, "cache < dataset: second sweep read nothing from NVM");
  c.expect(large == 0, "cache > dataset: second sweep read " + std::to_string(large) + " B");
  if (c.pass) {
    c.detail << "16 MiB dataset: cache 8 MiB -> " << small << " B NVM reads, cache 32 MiB -> 0 B";
  }
}

void modeled_time_ordering(Check& c) {
  const auto& vol = run(make_config(apps::App::kMatAdd, apps::Mode::kActive, TierKind::kNvmDirect,
                                    apps::DatasetSize::kDesk, apps::ObjectSize::kBig,
                                    apps::ResultMode::kVolatile));
  const auto& store = run(make_config(apps::App::kMatAdd, apps::Mode::kActive,
                                      TierKind::kNvmDirect, apps::DatasetSize::kDesk,
                                      apps::ObjectSize::kBig, apps::ResultMode::kStore));
  const auto& mm = run(make_config(apps::App::kMatAdd, apps::Mode::kActive, TierKind::kMemoryMode));
  const auto& dram = run(make_config(apps::App::kMatAdd, apps::Mode::kActive, TierKind::kDram));
  // Recompute both orderings from the raw counters and the default costs.
  CostModel cm;
  auto cost = [&](const std::array<TierCounters, kTierKindCount>& t) {
    std::uint64_t ps = 0;
    for (std::size_t i = 0; i < kTierKindCount; ++i) {
      const auto& x = t[i];
      bool nvm_medium = i != static_cast<std::size_t>(TierKind::kDram);
      ps += x.bytes_read * (nvm_medium ? cm.nvm_read_ps_per_byte : cm.dram_read_ps_per_byte) +
            x.bytes_written * (nvm_medium ? cm.nvm_write_ps_per_byte : cm.dram_write_ps_per_byte) +
            x.cache_bytes_read * cm.dram_read_ps_per_byte +
            x.cache_bytes_written * cm.dram_write_ps_per_byte + x.ops * cm.per_op_latency_ps;
    }
    return ps;
  };
  c.expect(cost(vol.method_traffic) == vol.method_modeled_time_ps &&
               cost(store.method_traffic) == store.method_modeled_time_ps &&
               cost(mm.method_traffic) == mm.method_modeled_time_ps &&
               cost(dram.method_traffic) == dram.method_modeled_time_ps,
           "modeled time does not match counters x costs");
  c.expect(vol.modeled_time_ps < store.modeled_time_ps, "volatile result not cheaper than NVM store");
  c.expect(mm.method_modeled_time_ps > dram.method_modeled_time_ps,
           "MM-cold method traffic not costlier than DRAM");
  if (c.pass) {
    c.detail << "matadd volatile " << vol.modeled_time_ps / 1000 << " ns < store "
             << store.modeled_time_ps / 1000 << " ns; MM-cold " << mm.method_modeled_time_ps / 1000
             << " ns > DRAM " << dram.method_modeled_time_ps / 1000 << " ns";
  }
}

wire::WireCounters scripted(Session& s) {
  apps::register_kernel_classes(s);
  for (const auto& b : k::gen_f_array(5, 40000, k::kFDistD1, k::kFDistD2, 10000)) {
    ObjectId id = s.make_persistent("FloatArray", b, TierKind::kNvmDirect);
    s.invoke(id, "histogram");
    s.invoke(id, "mean");
    s.fetch_full(id);
    s.delete_object(id);
  }
  try {
    s.fetch_full(ObjectId{1, 1});
  } catch (const Error&) {
  }
  s.flush();
  s.stats();
  return s.counters().wire;
}

void protocol_properties(Check& c) {
  std::mt19937_64 rng(31);
  int frame_ok = 0, payload_ok = 0;
  for (int i = 0; i < 10'000; ++i) {
    wire::Frame f;
    f.msg_type = static_cast<std::uint8_t>(1 + rng() % 8);
    if (rng() % 2) f.msg_type |= wire::kReplyBit;
    f.request_id = rng();
    f.body.resize(rng() % 512);
    for (auto& b : f.body) b = static_cast<std::uint8_t>(rng());
    frame_ok += wire::decode_frame(wire::encode_frame(f)) == f;
    BlockPayload p = aos::testing::random_payload(rng);
    payload_ok += bit_equal(decode_payload(encode_payload(p)), p);
  }
  c.expect(frame_ok == 10'000, "frame round trip failures");
  c.expect(payload_ok == 10'000, "payload round trip failures");

  Store st;
  int untyped = 0, server_threw = 0;
  for (int i = 0; i < 10'000; ++i) {
    Bytes raw(rng() % 96);
    for (auto& b : raw) b = static_cast<std::uint8_t>(rng());
    if (raw.size() >= 13 && i % 2) {
      std::uint32_t len = static_cast<std::uint32_t>(raw.size() - 4);
      for (int j = 0; j < 4; ++j) raw[j] = static_cast<std::uint8_t>(len >> (8 * j));
      raw[4] = static_cast<std::uint8_t>(1 + rng() % 8);
    }
    for (auto decode : {+[](ByteView b) { decode_payload(b); },
                        +[](ByteView b) { wire::decode_frame(b); },
                        +[](ByteView b) { wire::split_frames(b); }}) {
      try {
        decode(raw);
      } catch (const DecodeError&) {
      } catch (...) {
        ++untyped;
      }
    }
    try {
      st.server->handle(raw);
    } catch (...) {
      ++server_threw;
    }
  }
  c.expect(untyped == 0, std::to_string(untyped) + " untyped decode errors");
  c.expect(server_threw == 0, "server threw on malformed input");

  Store a, b;
  auto loop = scripted(*a.session);
  std::uint16_t port = b.server->listen_tcp();
  Session tcp(connect_tcp("127.0.0.1", port));
  auto over_tcp = scripted(tcp);
  c.expect(loop == over_tcp, "client counters differ between loopback and TCP");
  c.expect(a.server->counters() == b.server->counters(),
           "server counters differ between loopback and TCP");
  b.server->stop();
  if (c.pass) {
    c.detail << "1e4 frame + 1e4 payload round trips, 1e4 malformed inputs, loopback == TCP ("
             << loop.bytes_sent + loop.bytes_received << " B)";
  }
}

void metric_recomputation(Check& c) {
  aos::testing::TempDir dir;
  std::vector<bench::BenchmarkReport> reports(g_reports.begin(), g_reports.end());
  for (auto& r : reports) r.outcome.reset();
  bench::emit_reports(reports, bench::ReportFormat::kJson, dir / "reports.json");
  bench::emit_reports(reports, bench::ReportFormat::kCsv, dir / "reports.csv");
  std::ifstream in(dir / "reports.json");
  json all = json::parse(in);
  if (!all.is_array()) all = json::array({all});
  c.expect(all.size() == g_reports.size() && !g_reports.empty(), "report count mismatch");
  std::size_t checked = 0;
  for (const auto& r : all) {
    const auto& t = r.at("timing_ns");
    const auto& s = r.at("sizes");
    const auto& m = r.at("metrics");
    auto ratio = [](std::uint64_t num, std::uint64_t den) {
      return static_cast<double>(num) / static_cast<double>(den);
    };
    std::uint64_t dataset = s.at("dataset_bytes");
    std::uint64_t method_input = s.at("method_input_bytes");
    bool ok = m.at("computation_to_data_ratio").get<double>() ==
                  ratio(t.at("compute").get<std::uint64_t>(), dataset) &&
              m.at("method_computation_index").get<double>() ==
                  ratio(t.at("method_total").get<std::uint64_t>(), method_input) &&
              m.at("output_size_ratio").get<double>() ==
                  ratio(s.at("output_bytes").get<std::uint64_t>(), dataset) &&
              m.at("reuse_factor").get<double>() == ratio(method_input, dataset);
    // Exact rational check for the counter-only metrics.
    ok = ok && method_input % dataset == 0 &&
         m.at("reuse_factor").get<double>() == static_cast<double>(method_input / dataset);
    bench::Metrics re = bench::recompute_metrics(r);
    ok = ok && re.computation_to_data_ratio == m.at("computation_to_data_ratio").get<double>() &&
         re.method_computation_index == m.at("method_computation_index").get<double>() &&
         re.output_size_ratio == m.at("output_size_ratio").get<double>() &&
         re.reuse_factor == m.at("reuse_factor").get<double>();
    std::uint64_t tiers_ps = 0;
    for (const auto& [name, tc] : r.at("compute_tiers").items()) {
      if (!tc.is_null()) tiers_ps += tc.at("modeled_time_ps").get<std::uint64_t>();
    }
    ok = ok && tiers_ps == r.at("modeled_time_ps").get<std::uint64_t>();
    c.expect(ok, "metrics of " + r.at("config").dump() + " do not recompute");
    checked += ok;
  }
  std::ifstream csv(dir / "reports.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  c.expect(lines == g_reports.size() + 1, "CSV row count mismatch");
  if (c.pass) c.detail << checked << " reports recomputed exactly (JSON and CSV emitted)";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Check&)> fn;
  };
  const std::vector<Criterion> criteria{
      {1, "kernel correctness vs oracles", kernel_correctness},
      {2, "active/passive equivalence", active_passive_equivalence},
      {3, "reuse-factor read counts", reuse_counters},
      {4, "output size ratio", output_size_ratio},
      {5, "data-movement locality law", data_movement_law},
      {6, "persistence semantics", persistence},
      {7, "memory-mode cache law", memory_mode_cache},
      {8, "modeled-time ordering", modeled_time_ordering},
      {9, "protocol and serialization properties", protocol_properties},
      {10, "metric recomputation", metric_recomputation},
  };
  int failures = 0;
  for (const auto& cr : criteria) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
      cr.fn(c);
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail.str("");
      c.detail << "exception: " << e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !c.pass;
    std::printf("%s criterion %d (%s) [%.1fs]: %s\n", c.pass ? "PASS" : "FAIL", cr.id, cr.name,
                secs, c.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures;
}
