#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "aos/descriptors.hpp"
#include "aos/object_id.hpp"
#include "aos/payload.hpp"
#include "aos/tier.hpp"

namespace aos {

// ---------------------------------------------------------------------------
// Routine catalog: the server-side code that registered methods bind to.

/// Read-only routine: computes a new payload from the target and arguments.
using PureRoutine =
    std::function<BlockPayload(const PayloadView& target, std::span<const PayloadView> args)>;
/// Mutating routine: updates the target's f64 data in place.
using MutatingRoutine =
    std::function<void(MutablePayloadView target, std::span<const PayloadView> args)>;

struct Routine {
  PureRoutine pure;
  MutatingRoutine mutating;

  bool mutates() const { return static_cast<bool>(mutating); }
};

class RoutineCatalog {
 public:
  void add(const std::string& key, PureRoutine fn);
  void add_mutating(const std::string& key, MutatingRoutine fn);

  const Routine* find(const std::string& key) const;
  std::vector<std::string> keys() const;

 private:
  std::map<std::string, Routine> routines_;
};

// ---------------------------------------------------------------------------

enum class PlacementKind : std::uint8_t {
  kReturnByValue = 0,
  kVolatileDram = 1,
  kStoreInTier = 2,
};

struct ResultPlacement {
  PlacementKind kind = PlacementKind::kReturnByValue;
  TierKind tier = TierKind::kDram;  // kStoreInTier only

  static ResultPlacement by_value() { return {}; }
  static ResultPlacement volatile_dram() { return {PlacementKind::kVolatileDram, TierKind::kDram}; }
  static ResultPlacement store_in(TierKind t) { return {PlacementKind::kStoreInTier, t}; }

  friend bool operator==(const ResultPlacement&, const ResultPlacement&) = default;
};

/// An invocation argument: an inline payload or a reference to a stored object.
using InvokeArg = std::variant<BlockPayload, ObjectId>;

/// Inline payload, id of a stored result, or nothing (mutating routines).
using InvokeResult = std::variant<std::monostate, BlockPayload, ObjectId>;

struct InvokeRecord {
  ObjectId object_id;
  std::string method_name;
  std::uint64_t target_bytes = 0;  // data bytes of the target object
  std::uint64_t args_bytes = 0;    // data bytes of inline arguments
  std::uint64_t ref_bytes = 0;     // data bytes of referenced objects
  std::uint64_t result_bytes = 0;  // data bytes of the result payload
  std::array<TierCounters, kTierKindCount> tier_traffic{};
  std::uint64_t wall_ns = 0;
};

struct ObjectInfo {
  ObjectId id;
  std::string class_name;
  TierKind tier = TierKind::kDram;
  PayloadKind kind = PayloadKind::kFloatArray;
  std::uint64_t encoded_bytes = 0;
  std::uint64_t read_count = 0;
  std::uint64_t write_count = 0;
};

struct EngineConfig {
  std::uint64_t dram_capacity_bytes = 1ULL << 32;
  std::optional<ArenaConfig> nvm;  // NVM_DIRECT arena
  std::optional<ArenaConfig> mm;   // MEMORY_MODE arena
  CostModel cost_model;            // applied to the DRAM tier
  std::uint64_t small_result_threshold = 1ULL << 20;
  std::optional<std::uint64_t> id_seed;
};

/// The active object store: class/method registry, tiered object placement
/// and server-side method execution.
class Engine {
 public:
  Engine(EngineConfig config, RoutineCatalog catalog);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  void register_class(const ClassDescriptor& desc);
  void register_method(const MethodDescriptor& desc);
  std::vector<std::string> list_classes() const;
  std::optional<MethodDescriptor> find_method(const std::string& class_name,
                                              const std::string& method_name) const;

  ObjectId make_persistent(const std::string& class_name, const BlockPayload& payload,
                           TierKind tier);
  /// Same as make_persistent, for an already-encoded payload.
  ObjectId make_persistent_encoded(const std::string& class_name, ByteView encoded,
                                   TierKind tier);

  BlockPayload get_object(const ObjectId& id);
  /// Copies the encoded payload; same accounting as get_object.
  Bytes get_encoded(const ObjectId& id);

  InvokeResult invoke(const ObjectId& id, const std::string& method_name,
                      std::span<const InvokeArg> args, ResultPlacement placement);
  /// acc <- acc + a*b on acc's stored region.
  void invoke_fma_in_place(const ObjectId& acc, const ObjectId& a, const ObjectId& b);

  void delete_object(const ObjectId& id);
  void flush();

  std::optional<ObjectInfo> object_info(const ObjectId& id) const;
  std::vector<ObjectInfo> list_objects() const;

  bool has_tier(TierKind kind) const;
  Tier& tier(TierKind kind);
  std::array<std::optional<TierCounters>, kTierKindCount> tier_counters() const;

  std::vector<InvokeRecord> invoke_log() const;
  void clear_invoke_log();

  const RoutineCatalog& catalog() const { return catalog_; }
  std::uint64_t small_result_threshold() const { return config_.small_result_threshold; }

 private:
  struct ObjectEntry;
  struct ClassEntry {
    ClassDescriptor desc;
    std::map<std::string, MethodDescriptor> methods;
  };

  std::shared_ptr<ObjectEntry> find_entry(const ObjectId& id) const;
  ObjectId persist_bytes(const std::string& class_name, ByteView encoded,
                         const PayloadHeader& header, TierKind tier);
  InvokeResult run(const std::shared_ptr<ObjectEntry>& target, const std::string& method_name,
                   const Routine& routine, std::span<const InvokeArg> args,
                   const std::vector<TypeTag>* arg_schema, ResultPlacement placement);
  void recover(TierKind kind);
  void save_class_map(TierKind kind);

  EngineConfig config_;
  RoutineCatalog catalog_;
  IdGenerator ids_;
  std::array<std::unique_ptr<Tier>, kTierKindCount> tiers_;

  mutable std::shared_mutex registry_mu_;
  std::map<std::string, ClassEntry> classes_;

  mutable std::shared_mutex objects_mu_;
  std::unordered_map<ObjectId, std::shared_ptr<ObjectEntry>> objects_;

  mutable std::mutex log_mu_;
  std::vector<InvokeRecord> log_;
};

}  // namespace aos
