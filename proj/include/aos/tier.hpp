#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aos/object_id.hpp"
#include "aos/payload.hpp"

namespace aos {

enum class TierKind : std::uint8_t {
  kDram = 0,
  kNvmDirect = 1,
  kMemoryMode = 2,
};

inline constexpr std::size_t kTierKindCount = 3;

std::string_view tier_kind_name(TierKind kind);
std::optional<TierKind> parse_tier_kind(std::string_view name);

/// Analytic access cost. Integer picoseconds keep modeled time exact.
struct CostModel {
  std::uint64_t dram_read_ps_per_byte = 10;
  std::uint64_t dram_write_ps_per_byte = 10;
  std::uint64_t nvm_read_ps_per_byte = 30;
  std::uint64_t nvm_write_ps_per_byte = 100;
  std::uint64_t per_op_latency_ps = 1'000'000;

  /// Applies AOS_COST_{DRAM_READ,DRAM_WRITE,NVM_READ,NVM_WRITE}_NS and
  /// AOS_COST_PER_OP_NS (decimal nanoseconds) on top of `base`.
  static CostModel from_env(CostModel base);
  static CostModel from_env();
  /// Parses a decimal nanosecond string ("0.03", "1000") into picoseconds.
  static std::uint64_t parse_ns(std::string_view text);

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

struct ArenaConfig {
  std::filesystem::path path;        // unused for DRAM
  std::uint64_t capacity_bytes = 0;
  std::uint64_t cache_capacity_bytes = 0;  // MEMORY_MODE only
  CostModel cost_model;
  bool inject_delay = false;  // sleep for modeled time on every access
};

/// Traffic counters of one tier. For DRAM and NVM_DIRECT `bytes_*` is traffic
/// on the tier's own medium. For MEMORY_MODE `bytes_*` is NVM arena traffic
/// and `cache_bytes_*` is traffic on the DRAM cache in front of it.
struct TierCounters {
  TierKind kind = TierKind::kDram;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t cache_bytes_read = 0;
  std::uint64_t cache_bytes_written = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t ops = 0;
  std::uint64_t modeled_time_ps = 0;

  std::uint64_t modeled_time_ns() const { return modeled_time_ps / 1000; }

  TierCounters operator-(const TierCounters& base) const;
  TierCounters& operator+=(const TierCounters& other);
  friend bool operator==(const TierCounters&, const TierCounters&) = default;
};

/// Dot product of the counter vector with the cost model.
std::uint64_t recompute_modeled_time_ps(const TierCounters& c, const CostModel& m);

struct RegionRef {
  TierKind tier = TierKind::kDram;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  friend bool operator==(const RegionRef&, const RegionRef&) = default;
};

/// Read-only bytes of a stored object. `keepalive` pins heap-backed storage
/// for the lifetime of the view; arena-backed views alias the mapping.
struct ReadView {
  ByteView bytes;
  std::shared_ptr<const void> keepalive;
};

/// One memory tier. Thread-safe; callers serialize writers per object.
class Tier {
 public:
  virtual ~Tier() = default;
  Tier(const Tier&) = delete;
  Tier& operator=(const Tier&) = delete;

  TierKind kind() const { return kind_; }
  const CostModel& cost_model() const { return cost_; }

  /// `aligned_at` is the byte offset inside the object that must land on an
  /// 8-byte boundary (the payload header size, so f64 data can be aliased).
  virtual RegionRef store(const ObjectId& id, ByteView bytes,
                          std::size_t aligned_at = 0) = 0;
  virtual ReadView read_view(const ObjectId& id) = 0;
  virtual void write_in_place(const ObjectId& id, std::uint64_t offset,
                              ByteView bytes) = 0;
  /// Read-modify-write of [offset, offset+length) through a writable span
  /// over the backing region; accounted as a read plus a write.
  virtual void modify_in_place(
      const ObjectId& id, std::uint64_t offset, std::uint64_t length,
      const std::function<void(std::span<std::uint8_t>)>& fn) = 0;
  virtual void erase(const ObjectId& id) = 0;
  virtual void flush() = 0;

  virtual bool contains(const ObjectId& id) const = 0;
  virtual std::optional<RegionRef> region(const ObjectId& id) const = 0;
  virtual std::vector<ObjectId> list() const = 0;
  virtual std::uint64_t capacity_bytes() const = 0;
  virtual std::uint64_t used_bytes() const = 0;
  /// Bytes currently held by the DRAM cache (MEMORY_MODE), else 0.
  virtual std::uint64_t cache_occupancy_bytes() const { return 0; }

  TierCounters counters() const;

 protected:
  Tier(TierKind kind, const ArenaConfig& config);

  enum class Medium { kDram, kNvm };
  void charge_read(Medium m, std::uint64_t bytes);
  void charge_write(Medium m, std::uint64_t bytes);
  void charge_op();
  void count_hit();
  void count_miss();
  void maybe_delay(std::uint64_t ps) const;
  TierCounters* scope_slot() const;

 private:
  struct Counters;
  TierKind kind_;
  CostModel cost_;
  bool inject_delay_;
  std::shared_ptr<Counters> counters_;
};

std::unique_ptr<Tier> open_tier(TierKind kind, const ArenaConfig& config);

/// Collects, per tier kind, the traffic charged by the current thread while
/// the scope is alive. Scopes nest; only the innermost one is charged.
class TrafficScope {
 public:
  TrafficScope();
  ~TrafficScope();
  TrafficScope(const TrafficScope&) = delete;
  TrafficScope& operator=(const TrafficScope&) = delete;

  const std::array<TierCounters, kTierKindCount>& totals() const { return totals_; }

 private:
  friend class Tier;
  std::array<TierCounters, kTierKindCount> totals_;
  TrafficScope* previous_;
};

/// Arena file layout constants.
namespace arena_format {
inline constexpr char kMagic[4] = {'A', 'O', 'S', 'A'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint64_t kHeaderBytes = 64;
inline constexpr std::uint64_t kDirectoryEntryBytes = 32;
}  // namespace arena_format

}  // namespace aos
