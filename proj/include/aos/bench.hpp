#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aos/apps.hpp"
#include "aos/tier.hpp"
#include "aos/wire.hpp"

namespace aos::bench {

enum class Transport : std::uint8_t { kLoopback, kTcp };
std::string_view transport_name(Transport t);
std::optional<Transport> parse_transport(std::string_view s);

struct BenchmarkConfig {
  apps::App app = apps::App::kHistogram;
  apps::Mode mode = apps::Mode::kActive;
  TierKind tier = TierKind::kDram;
  apps::ObjectSize objects = apps::ObjectSize::kBig;
  apps::DatasetSize dataset = apps::DatasetSize::kDesk;
  apps::ResultMode result = apps::ResultMode::kValue;
  std::uint64_t seed = 1;
  std::filesystem::path arena_path;  // directory for arena files; empty = temp dir
  Transport transport = Transport::kLoopback;
  CostModel cost_model;
  std::uint64_t dram_capacity_bytes = 1ULL << 30;
  std::optional<std::uint64_t> mm_cache_bytes;  // default depends on dataset
  bool inject_delay = false;
  /// Replaces the profile sizes when set (app must match).
  std::optional<apps::AppParams> sizes;

  apps::AppParams app_params() const;
  std::uint64_t mm_cache_capacity() const;
  std::uint64_t arena_capacity() const;
  /// Throws Error(kInvalidArgument) for invalid combinations.
  void validate() const;
};

nlohmann::ordered_json config_to_json(const BenchmarkConfig& c);
/// Unknown keys and bad values raise Error(kInvalidArgument). Cost-model
/// fields default to `base_cost`.
BenchmarkConfig config_from_json(const nlohmann::json& j, const CostModel& base_cost = {});

struct Metrics {
  double computation_to_data_ratio = 0;  // ms per MB (MB = 10^6 bytes)
  double method_computation_index = 0;   // ms per MB of method input
  double output_size_ratio = 0;
  double reuse_factor = 0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

Metrics compute_metrics(std::uint64_t total_ns, std::uint64_t dataset_bytes,
                        std::uint64_t method_total_ns, std::uint64_t method_input_bytes,
                        std::uint64_t output_bytes);

struct BenchmarkReport {
  BenchmarkConfig config;
  std::string status = "ok";  // "ok" or "error"
  std::string error;

  std::uint64_t wall_total_ns = 0;
  std::uint64_t generate_ns = 0;
  std::uint64_t persist_ns = 0;
  std::uint64_t compute_ns = 0;
  std::uint64_t method_total_ns = 0;

  std::uint64_t input_objects = 0;
  std::uint64_t dataset_bytes = 0;
  std::uint64_t output_bytes = 0;
  std::uint64_t method_input_bytes = 0;
  std::uint64_t method_calls = 0;

  wire::WireCounters client_wire;   // whole run
  wire::WireCounters compute_wire;  // compute phase
  wire::WireCounters server_wire;
  std::array<std::optional<TierCounters>, kTierKindCount> tiers;          // whole run
  std::array<std::optional<TierCounters>, kTierKindCount> compute_tiers;  // compute phase
  std::array<TierCounters, kTierKindCount> method_traffic{};  // inside method executions
  std::map<std::uint64_t, std::uint64_t> read_counts;  // read_count -> number of inputs

  std::uint64_t modeled_time_ps = 0;         // compute-phase tier traffic
  std::uint64_t method_modeled_time_ps = 0;  // traffic inside methods
  std::string result_digest;
  Metrics metrics;

  /// Final result, not serialized.
  std::optional<apps::AppOutcome> outcome;
};

/// Runs one configuration end to end on a fresh store.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

nlohmann::ordered_json report_to_json(const BenchmarkReport& r);
/// Recomputes derived metrics from the raw fields of a serialized report.
Metrics recompute_metrics(const nlohmann::json& report);

const std::vector<std::string>& csv_header();
std::vector<std::string> csv_row(const BenchmarkReport& r);

enum class ReportFormat : std::uint8_t { kJson, kCsv };
std::optional<ReportFormat> parse_format(std::string_view s);

/// JSON: overwrites `path` with one report (or an array for several).
/// CSV: appends one row per report, writing the header first if the file is
/// new or empty. An empty path writes to stdout.
void emit_reports(const std::vector<BenchmarkReport>& reports, ReportFormat format,
                  const std::filesystem::path& path);

struct SweepSummaryRow {
  std::string app;
  std::string key;  // configuration without the mode
  double compute_time_ratio = 0;    // passive / active
  double client_bytes_ratio = 0;    // passive / active compute-phase bytes received
};

/// Reads a plan: a JSON array of config objects, or {"runs": [...]}.
std::vector<BenchmarkConfig> load_plan(const std::filesystem::path& path);
/// Runs every config serially; failures become error rows.
std::vector<BenchmarkReport> sweep(const std::vector<BenchmarkConfig>& plan);
std::vector<SweepSummaryRow> summarize(const std::vector<BenchmarkReport>& reports);
void print_summary(const std::vector<SweepSummaryRow>& rows, std::ostream& out);

}  // namespace aos::bench
