#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "aos/client.hpp"
#include "aos/kernels.hpp"

namespace aos::apps {

enum class App : std::uint8_t { kHistogram, kKMeans, kMatAdd, kMatMul };
enum class Mode : std::uint8_t { kActive, kPassive };
enum class ResultMode : std::uint8_t { kValue, kVolatile, kStore, kInPlaceFma };
enum class DatasetSize : std::uint8_t { kDesk, kSmall, kBig };
enum class ObjectSize : std::uint8_t { kBig, kSmall };

std::string_view app_name(App a);
std::string_view mode_name(Mode m);
std::string_view result_mode_name(ResultMode r);
std::string_view dataset_name(DatasetSize d);
std::string_view object_size_name(ObjectSize o);
std::optional<App> parse_app(std::string_view s);
std::optional<Mode> parse_mode(std::string_view s);
std::optional<ResultMode> parse_result_mode(std::string_view s);
std::optional<DatasetSize> parse_dataset(std::string_view s);
std::optional<ObjectSize> parse_object_size(std::string_view s);

inline constexpr std::uint64_t kMiB = 1ULL << 20;

/// Dataset bytes of each size profile: 16 MiB, 256 MiB, 2 GiB.
std::uint64_t dataset_profile_bytes(DatasetSize d);
/// Object bytes for the array apps: 8 MiB (big) or 1 MiB (small).
std::uint64_t object_profile_bytes(ObjectSize o);
/// Matrix side per dataset profile: 336, 2016, 4032.
std::uint64_t matrix_profile_side(DatasetSize d);

struct AppParams {
  App app = App::kHistogram;
  Mode mode = Mode::kActive;
  TierKind tier = TierKind::kDram;
  ResultMode result = ResultMode::kValue;
  std::uint64_t seed = 1;

  std::uint64_t hist_elements = 0;
  std::uint64_t hist_block_elems = 0;

  std::uint64_t km_points = 0;
  std::uint64_t km_block_rows = 0;
  kernels::KMeansSpec km;

  kernels::MatrixDescriptor matrix;  // both operands share it

  /// Fetch stored matrix results after the compute phase.
  bool collect_output = true;
  /// Called once, right before the compute phase starts.
  std::function<void()> on_compute_begin;

  /// Sizes from the dataset/object profiles. Matrix apps keep the grid side:
  /// 6 for big objects, 42 for small ones.
  static AppParams profile(App app, DatasetSize dataset, ObjectSize objects);

  /// Number of input objects and their total data bytes.
  std::uint64_t input_objects() const;
  std::uint64_t dataset_bytes() const;
  /// How many times the run reads each input object.
  std::uint64_t expected_reuse() const;

  /// Throws Error(kInvalidArgument) for unsupported combinations.
  void validate() const;
};

struct AppOutcome {
  BlockPayload summary;              // final histogram or centroids
  std::vector<BlockPayload> matrix;  // output blocks in grid order, when available
  std::vector<ObjectId> input_ids;
  std::vector<ObjectId> output_ids;  // stored output blocks

  std::uint64_t dataset_bytes = 0;
  std::uint64_t output_bytes = 0;
  std::uint64_t method_input_bytes = 0;  // dataset bytes consumed, with multiplicity
  std::uint64_t method_calls = 0;
  std::uint64_t client_method_ns = 0;    // kernel time spent client-side

  std::uint64_t generate_ns = 0;
  std::uint64_t persist_ns = 0;
  std::uint64_t compute_ns = 0;
  wire::WireCounters compute_wire;       // client traffic of the compute phase only
};

/// Registers the kernel classes and methods; already-registered entries are
/// left alone.
void register_kernel_classes(Session& session);

/// Generates and persists the dataset, then runs the kernel. ACTIVE issues
/// INVOKEs, PASSIVE fetches every block on each use and computes locally.
AppOutcome run_app(const AppParams& params, Session& session);

}  // namespace aos::apps
