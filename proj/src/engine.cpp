#include "aos/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>

#include "aos/error.hpp"

namespace aos {

void RoutineCatalog::add(const std::string& key, PureRoutine fn) {
  if (!routines_.emplace(key, Routine{std::move(fn), {}}).second) {
    throw Error(ErrorCode::kAlreadyExists, "routine '" + key + "' already in catalog");
  }
}

void RoutineCatalog::add_mutating(const std::string& key, MutatingRoutine fn) {
  if (!routines_.emplace(key, Routine{{}, std::move(fn)}).second) {
    throw Error(ErrorCode::kAlreadyExists, "routine '" + key + "' already in catalog");
  }
}

const Routine* RoutineCatalog::find(const std::string& key) const {
  auto it = routines_.find(key);
  return it == routines_.end() ? nullptr : &it->second;
}

std::vector<std::string> RoutineCatalog::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : routines_) out.push_back(k);
  return out;
}

struct Engine::ObjectEntry {
  ObjectId id;
  std::string class_name;
  TierKind tier = TierKind::kDram;
  PayloadHeader header;
  std::uint64_t encoded_bytes = 0;
  std::atomic<std::uint64_t> read_count{0};
  std::atomic<std::uint64_t> write_count{0};
  std::shared_mutex lock;
  bool deleted = false;  // guarded by `lock`
};

namespace {

constexpr const char* kClassMapSuffix = ".classes";

Error not_found(const ObjectId& id) {
  return Error(ErrorCode::kNotFound, "object " + id.to_string() + " not found");
}

std::filesystem::path class_map_path(const ArenaConfig& c) {
  return std::filesystem::path(c.path.string() + kClassMapSuffix);
}

}  // namespace

Engine::Engine(EngineConfig config, RoutineCatalog catalog)
    : config_(std::move(config)), catalog_(std::move(catalog)) {
  if (config_.id_seed) ids_.reseed(*config_.id_seed);
  ArenaConfig dram;
  dram.capacity_bytes = config_.dram_capacity_bytes;
  dram.cost_model = config_.cost_model;
  tiers_[static_cast<std::size_t>(TierKind::kDram)] = open_tier(TierKind::kDram, dram);
  if (config_.nvm) {
    tiers_[static_cast<std::size_t>(TierKind::kNvmDirect)] =
        open_tier(TierKind::kNvmDirect, *config_.nvm);
    recover(TierKind::kNvmDirect);
  }
  if (config_.mm) {
    tiers_[static_cast<std::size_t>(TierKind::kMemoryMode)] =
        open_tier(TierKind::kMemoryMode, *config_.mm);
  }
}

Engine::~Engine() {
  try {
    flush();
  } catch (...) {
  }
}

void Engine::recover(TierKind kind) {
  Tier& t = tier(kind);
  std::unordered_map<ObjectId, std::string> class_of;
  if (std::ifstream in(class_map_path(*config_.nvm)); in) {
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string hex, name;
      if (ls >> hex >> name) {
        if (auto id = ObjectId::parse(hex)) class_of[*id] = name;
      }
    }
  }
  for (const ObjectId& id : t.list()) {
    auto entry = std::make_shared<ObjectEntry>();
    entry->id = id;
    entry->tier = kind;
    if (auto it = class_of.find(id); it != class_of.end()) entry->class_name = it->second;
    ReadView v = t.read_view(id);
    entry->header = parse_payload_header(v.bytes);
    entry->encoded_bytes = v.bytes.size();
    objects_.emplace(id, std::move(entry));
  }
}

void Engine::save_class_map(TierKind kind) {
  if (kind != TierKind::kNvmDirect || !config_.nvm) return;
  std::vector<std::pair<ObjectId, std::string>> rows;
  {
    std::shared_lock lock(objects_mu_);
    for (const auto& [id, e] : objects_) {
      if (e->tier == kind) rows.emplace_back(id, e->class_name);
    }
  }
  std::sort(rows.begin(), rows.end());
  auto path = class_map_path(*config_.nvm);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& [id, name] : rows) out << id.to_string() << ' ' << name << '\n';
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void Engine::register_class(const ClassDescriptor& desc) {
  desc.validate();
  std::unique_lock lock(registry_mu_);
  if (classes_.contains(desc.class_name)) {
    throw Error(ErrorCode::kAlreadyExists, "class '" + desc.class_name + "' already registered");
  }
  classes_.emplace(desc.class_name, ClassEntry{desc, {}});
}

void Engine::register_method(const MethodDescriptor& desc) {
  if (desc.method_name.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "method name must not be empty");
  }
  const Routine* routine = catalog_.find(desc.routine_key);
  if (routine == nullptr) {
    throw Error(ErrorCode::kUnknownRoutine, "unknown routine '" + desc.routine_key + "'");
  }
  if (routine->mutates() != desc.mutates_target) {
    throw Error(ErrorCode::kInvalidArgument,
                "mutates_target disagrees with routine '" + desc.routine_key + "'");
  }
  std::unique_lock lock(registry_mu_);
  auto cls = classes_.find(desc.class_name);
  if (cls == classes_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown class '" + desc.class_name + "'");
  }
  if (!cls->second.methods.emplace(desc.method_name, desc).second) {
    throw Error(ErrorCode::kAlreadyExists,
                "method " + desc.class_name + "." + desc.method_name + " already registered");
  }
}

std::vector<std::string> Engine::list_classes() const {
  std::shared_lock lock(registry_mu_);
  std::vector<std::string> out;
  for (const auto& [name, _] : classes_) out.push_back(name);
  return out;
}

std::optional<MethodDescriptor> Engine::find_method(const std::string& class_name,
                                                    const std::string& method_name) const {
  std::shared_lock lock(registry_mu_);
  auto cls = classes_.find(class_name);
  if (cls == classes_.end()) return std::nullopt;
  auto m = cls->second.methods.find(method_name);
  if (m == cls->second.methods.end()) return std::nullopt;
  return m->second;
}

bool Engine::has_tier(TierKind kind) const {
  return tiers_[static_cast<std::size_t>(kind)] != nullptr;
}

Tier& Engine::tier(TierKind kind) {
  auto& t = tiers_[static_cast<std::size_t>(kind)];
  if (!t) {
    throw Error(ErrorCode::kInvalidArgument,
                "tier " + std::string(tier_kind_name(kind)) + " is not open");
  }
  return *t;
}

std::array<std::optional<TierCounters>, kTierKindCount> Engine::tier_counters() const {
  std::array<std::optional<TierCounters>, kTierKindCount> out;
  for (std::size_t i = 0; i < kTierKindCount; ++i) {
    if (tiers_[i]) out[i] = tiers_[i]->counters();
  }
  return out;
}

ObjectId Engine::persist_bytes(const std::string& class_name, ByteView encoded,
                               const PayloadHeader& header, TierKind kind) {
  Tier& t = tier(kind);
  ObjectId id = ids_.next();
  t.store(id, encoded, header.header_size);
  auto entry = std::make_shared<ObjectEntry>();
  entry->id = id;
  entry->class_name = class_name;
  entry->tier = kind;
  entry->header = header;
  entry->encoded_bytes = encoded.size();
  entry->write_count = 1;
  std::unique_lock lock(objects_mu_);
  objects_.emplace(id, std::move(entry));
  return id;
}

ObjectId Engine::make_persistent(const std::string& class_name, const BlockPayload& payload,
                                 TierKind kind) {
  Bytes encoded = encode_payload(payload);
  return make_persistent_encoded(class_name, encoded, kind);
}

ObjectId Engine::make_persistent_encoded(const std::string& class_name, ByteView encoded,
                                         TierKind kind) {
  {
    std::shared_lock lock(registry_mu_);
    if (!classes_.contains(class_name)) {
      throw Error(ErrorCode::kNotFound, "unknown class '" + class_name + "'");
    }
  }
  PayloadHeader header = parse_payload_header(encoded);
  return persist_bytes(class_name, encoded, header, kind);
}

std::shared_ptr<Engine::ObjectEntry> Engine::find_entry(const ObjectId& id) const {
  std::shared_lock lock(objects_mu_);
  auto it = objects_.find(id);
  if (it == objects_.end()) throw not_found(id);
  return it->second;
}

Bytes Engine::get_encoded(const ObjectId& id) {
  auto entry = find_entry(id);
  std::shared_lock lock(entry->lock);
  if (entry->deleted) throw not_found(id);
  ReadView v = tier(entry->tier).read_view(id);
  Bytes out(v.bytes.begin(), v.bytes.end());
  entry->read_count += 1;
  return out;
}

BlockPayload Engine::get_object(const ObjectId& id) {
  auto entry = find_entry(id);
  std::shared_lock lock(entry->lock);
  if (entry->deleted) throw not_found(id);
  ReadView v = tier(entry->tier).read_view(id);
  BlockPayload p = decode_payload(v.bytes);
  entry->read_count += 1;
  return p;
}

InvokeResult Engine::invoke(const ObjectId& id, const std::string& method_name,
                            std::span<const InvokeArg> args, ResultPlacement placement) {
  auto target = find_entry(id);
  auto method = find_method(target->class_name, method_name);
  if (!method) {
    throw Error(ErrorCode::kNotFound, "method '" + method_name + "' not registered for class '" +
                                          target->class_name + "'");
  }
  const Routine* routine = catalog_.find(method->routine_key);
  if (routine == nullptr) {
    throw Error(ErrorCode::kUnknownRoutine, "unknown routine '" + method->routine_key + "'");
  }
  return run(target, method_name, *routine, args, &method->arg_schema, placement);
}

void Engine::invoke_fma_in_place(const ObjectId& acc, const ObjectId& a, const ObjectId& b) {
  const Routine* routine = catalog_.find("matrix.fma_in_place");
  if (routine == nullptr || !routine->mutates()) {
    throw Error(ErrorCode::kUnknownRoutine, "catalog has no 'matrix.fma_in_place' routine");
  }
  auto target = find_entry(acc);
  std::array<InvokeArg, 2> args{a, b};
  static const std::vector<TypeTag> kSchema{TypeTag::kSubmatrix, TypeTag::kSubmatrix};
  if (target->header.kind != PayloadKind::kSubmatrix) {
    throw Error(ErrorCode::kInvalidArgument, "fma accumulator must be a Submatrix");
  }
  run(target, "fma_in_place", *routine, args, &kSchema, ResultPlacement::by_value());
}

InvokeResult Engine::run(const std::shared_ptr<ObjectEntry>& target,
                         const std::string& method_name, const Routine& routine,
                         std::span<const InvokeArg> args,
                         const std::vector<TypeTag>* arg_schema, ResultPlacement placement) {
  // Resolve referenced objects and check the argument schema before any
  // tier traffic happens.
  std::vector<std::shared_ptr<ObjectEntry>> refs(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (const auto* rid = std::get_if<ObjectId>(&args[i])) {
      refs[i] = find_entry(*rid);
      if (routine.mutates() && refs[i] == target) {
        throw Error(ErrorCode::kInvalidArgument,
                    "mutating target " + target->id.to_string() + " aliases an argument");
      }
    }
  }
  if (arg_schema != nullptr) {
    if (arg_schema->size() != args.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  method_name + ": expected " + std::to_string(arg_schema->size()) +
                      " arguments, got " + std::to_string(args.size()));
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      PayloadKind kind;
      std::uint64_t elements;
      if (refs[i]) {
        kind = refs[i]->header.kind;
        elements = refs[i]->header.data_bytes / 8;
      } else {
        const auto& p = std::get<BlockPayload>(args[i]);
        p.validate();
        kind = p.kind;
        elements = p.element_count();
      }
      if (!payload_matches((*arg_schema)[i], kind, elements)) {
        throw Error(ErrorCode::kInvalidArgument,
                    method_name + ": argument " + std::to_string(i) + " is " +
                        std::string(payload_kind_name(kind)) + ", expected " +
                        std::string(type_tag_name((*arg_schema)[i])));
      }
    }
  }
  if (placement.kind == PlacementKind::kStoreInTier && !has_tier(placement.tier)) {
    throw Error(ErrorCode::kInvalidArgument,
                "result tier " + std::string(tier_kind_name(placement.tier)) + " is not open");
  }

  // Lock every involved object in id order; the target exclusively when the
  // routine mutates it.
  std::vector<ObjectEntry*> order;
  order.push_back(target.get());
  for (const auto& r : refs) {
    if (r) order.push_back(r.get());
  }
  std::sort(order.begin(), order.end(),
            [](const ObjectEntry* x, const ObjectEntry* y) { return x->id < y->id; });
  order.erase(std::unique(order.begin(), order.end()), order.end());
  std::vector<std::shared_lock<std::shared_mutex>> shared;
  std::unique_lock<std::shared_mutex> exclusive;
  for (ObjectEntry* e : order) {
    if (e == target.get() && routine.mutates()) {
      exclusive = std::unique_lock(e->lock);
    } else {
      shared.emplace_back(e->lock);
    }
    if (e->deleted) throw not_found(e->id);
  }

  InvokeRecord record;
  record.object_id = target->id;
  record.method_name = method_name;
  record.target_bytes = target->header.data_bytes;
  InvokeResult result;
  auto t0 = std::chrono::steady_clock::now();
  {
    TrafficScope scope;
    std::vector<ReadView> held;
    std::vector<PayloadView> views;
    views.reserve(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (refs[i]) {
        held.push_back(tier(refs[i]->tier).read_view(refs[i]->id));
        views.push_back(PayloadView::over(held.back().bytes));
        record.ref_bytes += refs[i]->header.data_bytes;
      } else {
        const auto& p = std::get<BlockPayload>(args[i]);
        views.push_back(PayloadView::of(p));
        record.args_bytes += payload_size_bytes(p);
      }
    }

    if (routine.mutates()) {
      const PayloadHeader& h = target->header;
      tier(target->tier)
          .modify_in_place(target->id, h.header_size, h.data_bytes,
                           [&](std::span<std::uint8_t> data) {
                             MutablePayloadView mv;
                             mv.kind = h.kind;
                             mv.rows = h.rows;
                             mv.cols = h.cols;
                             if (h.kind == PayloadKind::kHistogram ||
                                 h.kind == PayloadKind::kPartialSum) {
                               throw Error(ErrorCode::kInvalidArgument,
                                           "mutating routines need an f64-only target");
                             }
                             if (!data.empty()) {
                               mv.values = {reinterpret_cast<double*>(data.data()),
                                            data.size() / 8};
                             }
                             routine.mutating(mv, views);
                           });
    } else {
      ReadView tv = tier(target->tier).read_view(target->id);
      BlockPayload out = routine.pure(PayloadView::over(tv.bytes), views);
      out.validate();
      record.result_bytes = payload_size_bytes(out);
      switch (placement.kind) {
        case PlacementKind::kReturnByValue:
          if (record.result_bytes > config_.small_result_threshold) {
            throw Error(ErrorCode::kInvalidArgument,
                        method_name + ": result of " + std::to_string(record.result_bytes) +
                            " bytes exceeds the by-value threshold");
          }
          result = std::move(out);
          break;
        case PlacementKind::kVolatileDram:
        case PlacementKind::kStoreInTier: {
          TierKind dest = placement.kind == PlacementKind::kVolatileDram ? TierKind::kDram
                                                                         : placement.tier;
          Bytes encoded = encode_payload(out);
          result = persist_bytes(target->class_name, encoded, parse_payload_header(encoded),
                                 dest);
          break;
        }
      }
    }
    record.tier_traffic = scope.totals();
  }
  record.wall_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0)
          .count());

  if (routine.mutates()) {
    target->write_count += 1;
  } else {
    target->read_count += 1;
  }
  for (const auto& r : refs) {
    if (r) r->read_count += 1;
  }
  {
    std::lock_guard lock(log_mu_);
    log_.push_back(std::move(record));
  }
  return result;
}

void Engine::delete_object(const ObjectId& id) {
  auto entry = find_entry(id);
  std::unique_lock lock(entry->lock);
  if (entry->deleted) throw not_found(id);
  tier(entry->tier).erase(id);
  entry->deleted = true;
  std::unique_lock map_lock(objects_mu_);
  objects_.erase(id);
}

void Engine::flush() {
  for (auto& t : tiers_) {
    if (t) t->flush();
  }
  save_class_map(TierKind::kNvmDirect);
}

std::optional<ObjectInfo> Engine::object_info(const ObjectId& id) const {
  std::shared_ptr<ObjectEntry> e;
  {
    std::shared_lock lock(objects_mu_);
    auto it = objects_.find(id);
    if (it == objects_.end()) return std::nullopt;
    e = it->second;
  }
  return ObjectInfo{e->id,           e->class_name,       e->tier,
                    e->header.kind,  e->encoded_bytes,    e->read_count.load(),
                    e->write_count.load()};
}

std::vector<ObjectInfo> Engine::list_objects() const {
  std::vector<ObjectInfo> out;
  std::shared_lock lock(objects_mu_);
  out.reserve(objects_.size());
  for (const auto& [id, e] : objects_) {
    out.push_back(ObjectInfo{e->id, e->class_name, e->tier, e->header.kind, e->encoded_bytes,
                             e->read_count.load(), e->write_count.load()});
  }
  return out;
}

std::vector<InvokeRecord> Engine::invoke_log() const {
  std::lock_guard lock(log_mu_);
  return log_;
}

void Engine::clear_invoke_log() {
  std::lock_guard lock(log_mu_);
  log_.clear();
}

}  // namespace aos
