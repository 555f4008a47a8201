#include "aos/bench.hpp"

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "aos/engine.hpp"
#include "aos/server.hpp"

namespace aos::bench {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t since(Clock::time_point t0) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorCode::kInvalidArgument, msg);
}

template <typename T>
T parse_or_throw(std::optional<T> v, std::string_view field, const std::string& text) {
  if (!v) invalid("invalid " + std::string(field) + " '" + text + "'");
  return *v;
}

std::string fnv1a_hex(const std::vector<Bytes>& parts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : parts) {
    for (std::uint8_t b : p) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string digest(const apps::AppOutcome& out) {
  std::vector<Bytes> parts;
  if (!out.summary.values.empty() || !out.summary.counts.empty()) {
    parts.push_back(encode_payload(out.summary));
  }
  for (const auto& b : out.matrix) parts.push_back(encode_payload(b));
  return fnv1a_hex(parts);
}

ordered_json wire_json(const wire::WireCounters& c) {
  ordered_json msgs = ordered_json::object();
  for (std::size_t t = 0; t < c.msg_counts.size(); ++t) {
    if (c.msg_counts[t] != 0) msgs[wire::msg_type_name(static_cast<std::uint8_t>(t))] = c.msg_counts[t];
  }
  return ordered_json{{"bytes_sent", c.bytes_sent},
                      {"bytes_received", c.bytes_received},
                      {"messages", msgs}};
}

ordered_json tier_json(const TierCounters& t) {
  return ordered_json{{"bytes_read", t.bytes_read},
                      {"bytes_written", t.bytes_written},
                      {"cache_bytes_read", t.cache_bytes_read},
                      {"cache_bytes_written", t.cache_bytes_written},
                      {"cache_hits", t.cache_hits},
                      {"cache_misses", t.cache_misses},
                      {"ops", t.ops},
                      {"modeled_time_ps", t.modeled_time_ps}};
}

template <typename Opt>
ordered_json tiers_json(const std::array<Opt, kTierKindCount>& tiers) {
  ordered_json out = ordered_json::object();
  for (std::size_t i = 0; i < kTierKindCount; ++i) {
    const TierCounters* t = nullptr;
    if constexpr (std::is_same_v<Opt, TierCounters>) {
      t = &tiers[i];
    } else if (tiers[i]) {
      t = &*tiers[i];
    }
    if (t != nullptr) out[std::string(tier_kind_name(static_cast<TierKind>(i)))] = tier_json(*t);
  }
  return out;
}

std::uint64_t modeled_ps(const std::array<std::optional<TierCounters>, kTierKindCount>& tiers) {
  std::uint64_t total = 0;
  for (const auto& t : tiers) {
    if (t) total += t->modeled_time_ps;
  }
  return total;
}

std::filesystem::path unique_temp_dir() {
  static std::atomic<std::uint64_t> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("aos-bench-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

void remove_arena_files(const std::filesystem::path& dir) {
  for (const char* name : {"nvm.arena", "nvm.arena.classes", "mm.arena"}) {
    std::filesystem::remove(dir / name);
  }
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view transport_name(Transport t) { return t == Transport::kTcp ? "tcp" : "loopback"; }

std::optional<Transport> parse_transport(std::string_view s) {
  if (s == "loopback") return Transport::kLoopback;
  if (s == "tcp") return Transport::kTcp;
  return std::nullopt;
}

std::optional<ReportFormat> parse_format(std::string_view s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

apps::AppParams BenchmarkConfig::app_params() const {
  apps::AppParams p = sizes ? *sizes : apps::AppParams::profile(app, dataset, objects);
  p.app = app;
  p.mode = mode;
  p.tier = tier;
  p.result = result;
  p.seed = seed;
  return p;
}

std::uint64_t BenchmarkConfig::mm_cache_capacity() const {
  if (mm_cache_bytes) return *mm_cache_bytes;
  if (dataset == apps::DatasetSize::kBig && !sizes) return 256 * apps::kMiB;
  return 2 * app_params().dataset_bytes() + 32 * apps::kMiB;
}

std::uint64_t BenchmarkConfig::arena_capacity() const {
  return 3 * app_params().dataset_bytes() + 64 * apps::kMiB;
}

void BenchmarkConfig::validate() const {
  if (sizes && sizes->app != app) invalid("size override is for a different app");
  apps::AppParams p = app_params();
  p.validate();
  if (tier == TierKind::kDram && p.dataset_bytes() > dram_capacity_bytes) {
    invalid("dataset of " + std::to_string(p.dataset_bytes()) +
            " bytes does not fit the DRAM tier (" + std::to_string(dram_capacity_bytes) +
            " bytes)");
  }
  if (tier == TierKind::kMemoryMode && mm_cache_capacity() >= arena_capacity()) {
    invalid("memory-mode cache must be smaller than the arena");
  }
}

ordered_json config_to_json(const BenchmarkConfig& c) {
  ordered_json j{
      {"app", apps::app_name(c.app)},
      {"mode", apps::mode_name(c.mode)},
      {"tier", tier_kind_name(c.tier)},
      {"objects", apps::object_size_name(c.objects)},
      {"dataset", apps::dataset_name(c.dataset)},
      {"result", apps::result_mode_name(c.result)},
      {"seed", c.seed},
      {"arena_path", c.arena_path.string()},
      {"transport", transport_name(c.transport)},
      {"dram_capacity_bytes", c.dram_capacity_bytes},
      {"mm_cache_bytes", c.mm_cache_capacity()},
      {"inject_delay", c.inject_delay},
      {"cost_model",
       {{"dram_read_ps_per_byte", c.cost_model.dram_read_ps_per_byte},
        {"dram_write_ps_per_byte", c.cost_model.dram_write_ps_per_byte},
        {"nvm_read_ps_per_byte", c.cost_model.nvm_read_ps_per_byte},
        {"nvm_write_ps_per_byte", c.cost_model.nvm_write_ps_per_byte},
        {"per_op_latency_ps", c.cost_model.per_op_latency_ps}}},
  };
  if (c.sizes) {
    const auto& s = *c.sizes;
    j["sizes"] = ordered_json{{"hist_elements", s.hist_elements},
                              {"hist_block_elems", s.hist_block_elems},
                              {"km_points", s.km_points},
                              {"km_block_rows", s.km_block_rows},
                              {"km_centers", s.km.centers},
                              {"km_iterations", s.km.iterations},
                              {"km_dims", s.km.dims},
                              {"matrix_n", s.matrix.n},
                              {"matrix_k", s.matrix.k}};
  }
  return j;
}

BenchmarkConfig config_from_json(const json& j, const CostModel& base_cost) {
  if (!j.is_object()) invalid("config must be a JSON object");
  BenchmarkConfig c;
  c.cost_model = base_cost;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "app") {
        c.app = parse_or_throw(apps::parse_app(v.get<std::string>()), key, v.get<std::string>());
      } else if (key == "mode") {
        c.mode = parse_or_throw(apps::parse_mode(v.get<std::string>()), key, v.get<std::string>());
      } else if (key == "tier") {
        c.tier = parse_or_throw(parse_tier_kind(v.get<std::string>()), key, v.get<std::string>());
      } else if (key == "objects") {
        c.objects = parse_or_throw(apps::parse_object_size(v.get<std::string>()), key,
                                   v.get<std::string>());
      } else if (key == "dataset") {
        c.dataset =
            parse_or_throw(apps::parse_dataset(v.get<std::string>()), key, v.get<std::string>());
      } else if (key == "result") {
        c.result = parse_or_throw(apps::parse_result_mode(v.get<std::string>()), key,
                                  v.get<std::string>());
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "arena_path") {
        c.arena_path = v.get<std::string>();
      } else if (key == "transport") {
        c.transport =
            parse_or_throw(parse_transport(v.get<std::string>()), key, v.get<std::string>());
      } else if (key == "dram_capacity_bytes") {
        c.dram_capacity_bytes = v.get<std::uint64_t>();
      } else if (key == "mm_cache_bytes") {
        if (!v.is_null()) c.mm_cache_bytes = v.get<std::uint64_t>();
      } else if (key == "inject_delay") {
        c.inject_delay = v.get<bool>();
      } else if (key == "cost_model") {
        for (const auto& [ck, cv] : v.items()) {
          auto ps = cv.get<std::uint64_t>();
          if (ck == "dram_read_ps_per_byte") c.cost_model.dram_read_ps_per_byte = ps;
          else if (ck == "dram_write_ps_per_byte") c.cost_model.dram_write_ps_per_byte = ps;
          else if (ck == "nvm_read_ps_per_byte") c.cost_model.nvm_read_ps_per_byte = ps;
          else if (ck == "nvm_write_ps_per_byte") c.cost_model.nvm_write_ps_per_byte = ps;
          else if (ck == "per_op_latency_ps") c.cost_model.per_op_latency_ps = ps;
          else invalid("unknown cost_model field '" + ck + "'");
        }
      } else if (key == "sizes") {
        apps::AppParams s;
        s.hist_elements = v.value("hist_elements", std::uint64_t{0});
        s.hist_block_elems = v.value("hist_block_elems", std::uint64_t{0});
        s.km_points = v.value("km_points", std::uint64_t{0});
        s.km_block_rows = v.value("km_block_rows", std::uint64_t{0});
        s.km.centers = v.value("km_centers", s.km.centers);
        s.km.iterations = v.value("km_iterations", s.km.iterations);
        s.km.dims = v.value("km_dims", s.km.dims);
        s.matrix.n = v.value("matrix_n", std::uint64_t{0});
        s.matrix.k = v.value("matrix_k", std::uint64_t{0});
        c.sizes = s;
      } else {
        invalid("unknown config field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    invalid(std::string("bad config value: ") + e.what());
  }
  if (c.sizes) c.sizes->app = c.app;
  return c;
}

// ---------------------------------------------------------------------------

Metrics compute_metrics(std::uint64_t total_ns, std::uint64_t dataset_bytes,
                        std::uint64_t method_total_ns, std::uint64_t method_input_bytes,
                        std::uint64_t output_bytes) {
  if (dataset_bytes == 0) invalid("compute_metrics: dataset_bytes is zero");
  if (method_input_bytes == 0) invalid("compute_metrics: method_input_bytes is zero");
  // ms/MB with MB = 10^6 bytes reduces to ns/byte.
  Metrics m;
  m.computation_to_data_ratio = static_cast<double>(total_ns) / static_cast<double>(dataset_bytes);
  m.method_computation_index =
      static_cast<double>(method_total_ns) / static_cast<double>(method_input_bytes);
  m.output_size_ratio = static_cast<double>(output_bytes) / static_cast<double>(dataset_bytes);
  m.reuse_factor = static_cast<double>(method_input_bytes) / static_cast<double>(dataset_bytes);
  return m;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  BenchmarkReport report;
  report.config = config;
  auto t_start = Clock::now();

  const bool temp_arena = config.arena_path.empty();
  const std::filesystem::path dir = temp_arena ? unique_temp_dir() : config.arena_path;
  std::filesystem::create_directories(dir);
  remove_arena_files(dir);

  apps::AppParams params = config.app_params();
  EngineConfig ec;
  ec.dram_capacity_bytes = config.dram_capacity_bytes;
  ec.cost_model = config.cost_model;
  ec.id_seed = config.seed;
  if (config.tier == TierKind::kNvmDirect) {
    ec.nvm = ArenaConfig{dir / "nvm.arena", config.arena_capacity(), 0, config.cost_model,
                         config.inject_delay};
  }
  if (config.tier == TierKind::kMemoryMode) {
    ec.mm = ArenaConfig{dir / "mm.arena", config.arena_capacity(), config.mm_cache_capacity(),
                        config.cost_model, config.inject_delay};
  }

  try {
    Engine engine(ec, kernels::default_catalog());
    Server server(engine);
    std::unique_ptr<Connection> conn;
    if (config.transport == Transport::kTcp) {
      std::uint16_t port = server.listen_tcp("127.0.0.1", 0);
      conn = connect_tcp("127.0.0.1", port);
    } else {
      conn = server.connect_loopback();
    }
    Session session(std::move(conn));

    std::array<std::optional<TierCounters>, kTierKindCount> before{};
    params.on_compute_begin = [&] {
      before = engine.tier_counters();
      engine.clear_invoke_log();
    };
    std::array<std::optional<TierCounters>, kTierKindCount> after{};
    std::uint64_t method_ns = 0;
    apps::AppOutcome out;
    {
      // The compute phase ends inside run_app; tier counters are sampled
      // before any post-run result collection by disabling it here.
      apps::AppParams run = params;
      run.collect_output = false;
      out = apps::run_app(run, session);
      after = engine.tier_counters();
      for (const auto& rec : engine.invoke_log()) {
        method_ns += rec.wall_ns;
        for (std::size_t i = 0; i < kTierKindCount; ++i) {
          report.method_traffic[i] += rec.tier_traffic[i];
          report.method_traffic[i].kind = static_cast<TierKind>(i);
        }
      }
    }
    for (std::size_t i = 0; i < kTierKindCount; ++i) {
      if (after[i]) report.compute_tiers[i] = *after[i] - before[i].value_or(TierCounters{after[i]->kind});
    }
    for (const auto& id : out.input_ids) {
      auto info = engine.object_info(id);
      report.read_counts[info ? info->read_count : 0] += 1;
    }
    if (params.collect_output && !out.output_ids.empty()) {
      out.matrix.clear();
      for (const auto& id : out.output_ids) out.matrix.push_back(session.fetch_full(id));
    }

    report.generate_ns = out.generate_ns;
    report.persist_ns = out.persist_ns;
    report.compute_ns = out.compute_ns;
    report.method_total_ns = config.mode == apps::Mode::kActive ? method_ns : out.client_method_ns;
    report.input_objects = out.input_ids.size();
    report.dataset_bytes = out.dataset_bytes;
    report.output_bytes = out.output_bytes;
    report.method_input_bytes = out.method_input_bytes;
    report.method_calls = out.method_calls;
    report.client_wire = session.counters().wire;
    report.compute_wire = out.compute_wire;
    report.server_wire = server.counters();
    report.tiers = engine.tier_counters();
    report.modeled_time_ps = modeled_ps(report.compute_tiers);
    for (const auto& t : report.method_traffic) report.method_modeled_time_ps += t.modeled_time_ps;
    report.result_digest = digest(out);
    report.metrics = compute_metrics(report.compute_ns, report.dataset_bytes,
                                     report.method_total_ns, report.method_input_bytes,
                                     report.output_bytes);
    report.outcome = std::move(out);
    server.stop();
  } catch (...) {
    if (temp_arena) std::filesystem::remove_all(dir);
    throw;
  }
  if (temp_arena) std::filesystem::remove_all(dir);
  report.wall_total_ns = since(t_start);
  return report;
}

// ---------------------------------------------------------------------------

ordered_json report_to_json(const BenchmarkReport& r) {
  ordered_json reads = ordered_json::object();
  for (const auto& [count, objects] : r.read_counts) reads[std::to_string(count)] = objects;
  return ordered_json{
      {"config", config_to_json(r.config)},
      {"status", r.status},
      {"error", r.error},
      {"timing_ns",
       {{"wall_total", r.wall_total_ns},
        {"generate", r.generate_ns},
        {"persist", r.persist_ns},
        {"compute", r.compute_ns},
        {"method_total", r.method_total_ns}}},
      {"sizes",
       {{"input_objects", r.input_objects},
        {"dataset_bytes", r.dataset_bytes},
        {"output_bytes", r.output_bytes},
        {"method_input_bytes", r.method_input_bytes},
        {"method_calls", r.method_calls}}},
      {"wire",
       {{"client", wire_json(r.client_wire)},
        {"client_compute", wire_json(r.compute_wire)},
        {"server", wire_json(r.server_wire)}}},
      {"tiers", tiers_json(r.tiers)},
      {"compute_tiers", tiers_json(r.compute_tiers)},
      {"method_traffic", tiers_json(r.method_traffic)},
      {"read_counts", reads},
      {"modeled_time_ps", r.modeled_time_ps},
      {"modeled_time_ns", r.modeled_time_ps / 1000},
      {"method_modeled_time_ps", r.method_modeled_time_ps},
      {"result_digest", r.result_digest},
      {"metrics",
       {{"computation_to_data_ratio", r.metrics.computation_to_data_ratio},
        {"method_computation_index", r.metrics.method_computation_index},
        {"output_size_ratio", r.metrics.output_size_ratio},
        {"reuse_factor", r.metrics.reuse_factor}}},
  };
}

Metrics recompute_metrics(const json& report) {
  const auto& t = report.at("timing_ns");
  const auto& s = report.at("sizes");
  return compute_metrics(t.at("compute").get<std::uint64_t>(),
                         s.at("dataset_bytes").get<std::uint64_t>(),
                         t.at("method_total").get<std::uint64_t>(),
                         s.at("method_input_bytes").get<std::uint64_t>(),
                         s.at("output_bytes").get<std::uint64_t>());
}

const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> kHeader{
      "app", "mode", "tier", "objects", "dataset", "result", "seed", "transport", "status",
      "error", "input_objects", "dataset_bytes", "output_bytes", "method_input_bytes",
      "method_calls", "wall_total_ns", "compute_ns", "method_total_ns", "client_bytes_sent",
      "client_bytes_received", "compute_bytes_sent", "compute_bytes_received",
      "modeled_time_ps", "method_modeled_time_ps", "computation_to_data_ratio",
      "method_computation_index", "output_size_ratio", "reuse_factor", "result_digest"};
  return kHeader;
}

std::vector<std::string> csv_row(const BenchmarkReport& r) {
  const auto& c = r.config;
  auto u = [](std::uint64_t v) { return std::to_string(v); };
  return {std::string(apps::app_name(c.app)),
          std::string(apps::mode_name(c.mode)),
          std::string(tier_kind_name(c.tier)),
          std::string(apps::object_size_name(c.objects)),
          std::string(apps::dataset_name(c.dataset)),
          std::string(apps::result_mode_name(c.result)),
          u(c.seed),
          std::string(transport_name(c.transport)),
          r.status,
          r.error,
          u(r.input_objects),
          u(r.dataset_bytes),
          u(r.output_bytes),
          u(r.method_input_bytes),
          u(r.method_calls),
          u(r.wall_total_ns),
          u(r.compute_ns),
          u(r.method_total_ns),
          u(r.client_wire.bytes_sent),
          u(r.client_wire.bytes_received),
          u(r.compute_wire.bytes_sent),
          u(r.compute_wire.bytes_received),
          u(r.modeled_time_ps),
          u(r.method_modeled_time_ps),
          fmt_double(r.metrics.computation_to_data_ratio),
          fmt_double(r.metrics.method_computation_index),
          fmt_double(r.metrics.output_size_ratio),
          fmt_double(r.metrics.reuse_factor),
          r.result_digest};
}

void emit_reports(const std::vector<BenchmarkReport>& reports, ReportFormat format,
                  const std::filesystem::path& path) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  bool need_header = true;
  if (!path.empty()) {
    if (format == ReportFormat::kCsv) {
      std::error_code ec;
      auto size = std::filesystem::file_size(path, ec);
      need_header = ec || size == 0;
      file.open(path, std::ios::app);
    } else {
      file.open(path, std::ios::trunc);
    }
    if (!file) throw Error(ErrorCode::kIo, "cannot open " + path.string());
    out = &file;
  }
  if (format == ReportFormat::kJson) {
    if (reports.size() == 1) {
      *out << report_to_json(reports.front()).dump(2) << '\n';
    } else {
      ordered_json arr = ordered_json::array();
      for (const auto& r : reports) arr.push_back(report_to_json(r));
      *out << arr.dump(2) << '\n';
    }
  } else {
    auto write_row = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i != 0) *out << ',';
        *out << csv_escape(cells[i]);
      }
      *out << '\n';
    };
    if (need_header) write_row(csv_header());
    for (const auto& r : reports) write_row(csv_row(r));
  }
  out->flush();
  if (!*out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------

std::vector<BenchmarkConfig> load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open plan " + path.string());
  json plan;
  try {
    plan = json::parse(in);
  } catch (const json::exception& e) {
    invalid("plan is not valid JSON: " + std::string(e.what()));
  }
  const json* runs = &plan;
  if (plan.is_object()) {
    if (!plan.contains("runs")) invalid("plan object needs a 'runs' array");
    runs = &plan["runs"];
  }
  if (!runs->is_array()) invalid("plan must be an array of configs");
  CostModel base = CostModel::from_env();
  std::vector<BenchmarkConfig> out;
  for (const auto& entry : *runs) out.push_back(config_from_json(entry, base));
  return out;
}

std::vector<BenchmarkReport> sweep(const std::vector<BenchmarkConfig>& plan) {
  std::vector<BenchmarkReport> reports;
  for (const auto& c : plan) {
    try {
      reports.push_back(run_benchmark(c));
    } catch (const std::exception& e) {
      BenchmarkReport r;
      r.config = c;
      r.status = "error";
      r.error = e.what();
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

std::vector<SweepSummaryRow> summarize(const std::vector<BenchmarkReport>& reports) {
  auto key_of = [](const BenchmarkConfig& c) {
    return std::string(tier_kind_name(c.tier)) + "/" +
           std::string(apps::object_size_name(c.objects)) + "/" +
           std::string(apps::dataset_name(c.dataset)) + "/" +
           std::string(apps::result_mode_name(c.result)) + "/seed" + std::to_string(c.seed);
  };
  std::map<std::pair<std::string, std::string>, std::pair<const BenchmarkReport*, const BenchmarkReport*>>
      pairs;
  for (const auto& r : reports) {
    if (r.status != "ok") continue;
    auto& slot = pairs[{std::string(apps::app_name(r.config.app)), key_of(r.config)}];
    (r.config.mode == apps::Mode::kActive ? slot.first : slot.second) = &r;
  }
  std::vector<SweepSummaryRow> rows;
  for (const auto& [k, pr] : pairs) {
    const auto* active = pr.first;
    const auto* passive = pr.second;
    if (active == nullptr || passive == nullptr) continue;
    SweepSummaryRow row;
    row.app = k.first;
    row.key = k.second;
    row.compute_time_ratio = active->compute_ns == 0
                                 ? 0.0
                                 : static_cast<double>(passive->compute_ns) /
                                       static_cast<double>(active->compute_ns);
    row.client_bytes_ratio = active->compute_wire.bytes_received == 0
                                 ? 0.0
                                 : static_cast<double>(passive->compute_wire.bytes_received) /
                                       static_cast<double>(active->compute_wire.bytes_received);
    rows.push_back(row);
  }
  return rows;
}

void print_summary(const std::vector<SweepSummaryRow>& rows, std::ostream& out) {
  out << std::left << std::setw(10) << "app" << std::setw(40) << "config" << std::right
      << std::setw(16) << "time p/a" << std::setw(16) << "bytes p/a" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(10) << r.app << std::setw(40) << r.key << std::right
        << std::setw(16) << std::fixed << std::setprecision(3) << r.compute_time_ratio
        << std::setw(16) << r.client_bytes_ratio << '\n';
    out << std::defaultfloat;
  }
}

}  // namespace aos::bench
