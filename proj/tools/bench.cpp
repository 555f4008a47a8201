#include <CLI11.hpp>

#include <iostream>

#include "aos/bench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct RunOptions {
  std::string app = "histogram";
  std::string mode = "active";
  std::string tier = "dram";
  std::string objects = "big";
  std::string dataset = "desk";
  std::string result = "value";
  std::uint64_t seed = 1;
  std::string arena;
  std::string transport = "loopback";
  std::string out;
  std::string format = "json";
  std::uint64_t repeat = 1;
  std::uint64_t dram_capacity = 1ULL << 30;
  std::uint64_t mm_cache = 0;
  bool inject_delay = false;
};

aos::bench::BenchmarkConfig to_config(const RunOptions& o) {
  nlohmann::json j{{"app", o.app},         {"mode", o.mode},       {"tier", o.tier},
                   {"objects", o.objects}, {"dataset", o.dataset}, {"result", o.result},
                   {"seed", o.seed},       {"arena_path", o.arena}, {"transport", o.transport},
                   {"dram_capacity_bytes", o.dram_capacity},
                   {"inject_delay", o.inject_delay}};
  if (o.mm_cache != 0) j["mm_cache_bytes"] = o.mm_cache;
  auto c = aos::bench::config_from_json(j, aos::CostModel::from_env());
  c.validate();
  return c;
}

aos::bench::ReportFormat to_format(const std::string& s) {
  auto f = aos::bench::parse_format(s);
  if (!f) throw aos::Error(aos::ErrorCode::kInvalidArgument, "invalid format '" + s + "'");
  return *f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Active object store benchmark harness"};
  cli.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = cli.add_subcommand("run", "Run one configuration");
  run_cmd->add_option("--app", run.app, "histogram|kmeans|matadd|matmul");
  run_cmd->add_option("--mode", run.mode, "active|passive");
  run_cmd->add_option("--tier", run.tier, "dram|nvm|mm");
  run_cmd->add_option("--objects", run.objects, "big|small");
  run_cmd->add_option("--dataset", run.dataset, "desk|small|big");
  run_cmd->add_option("--result", run.result, "value|volatile|store|inplace_fma");
  run_cmd->add_option("--seed", run.seed, "Dataset seed");
  run_cmd->add_option("--arena", run.arena, "Directory for arena files (default: temporary)");
  run_cmd->add_option("--transport", run.transport, "loopback|tcp");
  run_cmd->add_option("--out", run.out, "Report file (default: stdout)");
  run_cmd->add_option("--format", run.format, "json|csv");
  run_cmd->add_option("--repeat", run.repeat, "Number of repetitions")->check(CLI::PositiveNumber);
  run_cmd->add_option("--dram-capacity", run.dram_capacity, "DRAM tier capacity in bytes");
  run_cmd->add_option("--mm-cache", run.mm_cache, "Memory-mode cache capacity in bytes");
  run_cmd->add_flag("--inject-delay", run.inject_delay, "Sleep for modeled access time");

  std::string plan_path;
  std::string sweep_out;
  auto* sweep_cmd = cli.add_subcommand("sweep", "Run every configuration of a plan file");
  sweep_cmd->add_option("--plan", plan_path, "JSON plan file")->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV output file (default: stdout)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = cli.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (run_cmd->parsed()) {
    aos::bench::BenchmarkConfig config;
    aos::bench::ReportFormat format;
    try {
      config = to_config(run);
      format = to_format(run.format);
    } catch (const std::exception& e) {
      std::cerr << "bench: " << e.what() << '\n';
      return kExitValidation;
    }
    try {
      std::vector<aos::bench::BenchmarkReport> reports;
      for (std::uint64_t i = 0; i < run.repeat; ++i) {
        reports.push_back(aos::bench::run_benchmark(config));
      }
      aos::bench::emit_reports(reports, format, run.out);
    } catch (const std::exception& e) {
      std::cerr << "bench: " << e.what() << '\n';
      return kExitRuntime;
    }
    return kExitOk;
  }

  std::vector<aos::bench::BenchmarkConfig> plan;
  try {
    plan = aos::bench::load_plan(plan_path);
    for (const auto& c : plan) c.validate();
  } catch (const aos::Error& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return e.code() == aos::ErrorCode::kIo ? kExitRuntime : kExitValidation;
  }
  try {
    auto reports = aos::bench::sweep(plan);
    aos::bench::emit_reports(reports, aos::bench::ReportFormat::kCsv, sweep_out);
    aos::bench::print_summary(aos::bench::summarize(reports), sweep_out.empty() ? std::cerr : std::cout);
    for (const auto& r : reports) {
      if (r.status != "ok") return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
