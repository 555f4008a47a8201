#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "aos/engine.hpp"
#include "aos/server.hpp"
#include "aos/wire.hpp"

namespace aos {

struct SessionCounters {
  wire::WireCounters wire;  // client-side view: sent = requests, received = replies
  std::uint64_t invokes = 0;
  std::uint64_t gets = 0;
  std::uint64_t puts = 0;
};

/// A client connection to the store. Usable from one thread at a time.
/// Passive-path fetches are never cached.
class Session {
 public:
  explicit Session(std::unique_ptr<Connection> connection,
                   std::uint32_t max_frame = wire::kDefaultMaxFrame);

  void register_class(const ClassDescriptor& desc);
  /// Registers remotely and remembers the descriptor for local stub calls.
  void register_method(const MethodDescriptor& desc);

  ObjectId make_persistent(const std::string& class_name, const BlockPayload& payload,
                           TierKind tier);
  BlockPayload fetch_full(const ObjectId& id);
  InvokeResult invoke(const ObjectId& id, const std::string& method_name,
                      std::span<const InvokeArg> args = {},
                      ResultPlacement placement = ResultPlacement::by_value());
  void delete_object(const ObjectId& id);
  void flush();
  wire::StatsSnapshot stats();

  const SessionCounters& counters() const { return counters_; }
  const MethodDescriptor* known_method(const std::string& class_name,
                                       const std::string& method_name) const;

 private:
  Bytes call(wire::MsgType type, ByteView body);

  std::unique_ptr<Connection> connection_;
  std::uint32_t max_frame_;
  std::uint64_t next_request_id_ = 1;
  SessionCounters counters_;
  std::map<std::pair<std::string, std::string>, MethodDescriptor> methods_;
};

/// Client-side proxy: a plain local object until persisted, afterwards every
/// method call is forwarded to the store.
class Stub {
 public:
  Stub(Session& session, std::string class_name, BlockPayload payload,
       const RoutineCatalog& local_catalog);

  bool is_remote() const { return std::holds_alternative<ObjectId>(state_); }
  std::optional<ObjectId> id() const;
  const std::string& class_name() const { return class_name_; }
  /// Local payload; throws once the stub is remote.
  const BlockPayload& local_payload() const;

  InvokeResult call(const std::string& method_name, std::span<const InvokeArg> args = {},
                    ResultPlacement placement = ResultPlacement::by_value());
  ObjectId persist(TierKind tier);

 private:
  Session* session_;
  std::string class_name_;
  std::variant<BlockPayload, ObjectId> state_;
  const RoutineCatalog* catalog_;
};

}  // namespace aos
