#include "aos/client.hpp"

namespace aos {

Session::Session(std::unique_ptr<Connection> connection, std::uint32_t max_frame)
    : connection_(std::move(connection)), max_frame_(max_frame) {}

Bytes Session::call(wire::MsgType type, ByteView body) {
  std::uint64_t rid = next_request_id_++;
  Bytes request;
  wire::encode_frame_into(static_cast<std::uint8_t>(type), rid, body, request, max_frame_);
  counters_.wire.bytes_sent += request.size();
  counters_.wire.msg_counts[static_cast<std::uint8_t>(type)] += 1;
  Bytes reply = connection_->round_trip(request);
  counters_.wire.bytes_received += reply.size();
  wire::Frame f = wire::decode_frame(reply, max_frame_);
  if (f.msg_type == static_cast<std::uint8_t>(wire::MsgType::kError)) {
    wire::ErrorBody e = wire::decode_error(f.body);
    throw Error(e.code, e.message);
  }
  if (f.request_id != rid || f.msg_type != wire::reply_type(type)) {
    throw Error(ErrorCode::kMalformed, "reply does not match request " + std::to_string(rid));
  }
  return std::move(f.body);
}

void Session::register_class(const ClassDescriptor& desc) {
  call(wire::MsgType::kRegisterClass, wire::encode_class(desc));
}

void Session::register_method(const MethodDescriptor& desc) {
  call(wire::MsgType::kRegisterMethod, wire::encode_method(desc));
  methods_[{desc.class_name, desc.method_name}] = desc;
}

const MethodDescriptor* Session::known_method(const std::string& class_name,
                                              const std::string& method_name) const {
  auto it = methods_.find({class_name, method_name});
  return it == methods_.end() ? nullptr : &it->second;
}

ObjectId Session::make_persistent(const std::string& class_name, const BlockPayload& payload,
                                  TierKind tier) {
  Bytes body = call(wire::MsgType::kMakePersistent,
                    wire::encode_make_persistent(class_name, tier, payload));
  counters_.puts += 1;
  return wire::decode_id(body);
}

BlockPayload Session::fetch_full(const ObjectId& id) {
  Bytes body = call(wire::MsgType::kGet, wire::encode_id(id));
  counters_.gets += 1;
  return decode_payload(body);
}

InvokeResult Session::invoke(const ObjectId& id, const std::string& method_name,
                             std::span<const InvokeArg> args, ResultPlacement placement) {
  Bytes body = call(wire::MsgType::kInvoke, wire::encode_invoke(id, method_name, placement, args));
  counters_.invokes += 1;
  return wire::decode_invoke_result(body);
}

void Session::delete_object(const ObjectId& id) {
  call(wire::MsgType::kDelete, wire::encode_id(id));
}

void Session::flush() { call(wire::MsgType::kFlush, {}); }

wire::StatsSnapshot Session::stats() {
  return wire::decode_stats(call(wire::MsgType::kStats, {}));
}

// ---------------------------------------------------------------------------

Stub::Stub(Session& session, std::string class_name, BlockPayload payload,
           const RoutineCatalog& local_catalog)
    : session_(&session),
      class_name_(std::move(class_name)),
      state_(std::move(payload)),
      catalog_(&local_catalog) {
  std::get<BlockPayload>(state_).validate();
}

std::optional<ObjectId> Stub::id() const {
  if (const auto* id = std::get_if<ObjectId>(&state_)) return *id;
  return std::nullopt;
}

const BlockPayload& Stub::local_payload() const {
  if (const auto* p = std::get_if<BlockPayload>(&state_)) return *p;
  throw Error(ErrorCode::kInvalidArgument, "stub is remote");
}

InvokeResult Stub::call(const std::string& method_name, std::span<const InvokeArg> args,
                        ResultPlacement placement) {
  if (const auto* id = std::get_if<ObjectId>(&state_)) {
    return session_->invoke(*id, method_name, args, placement);
  }
  const MethodDescriptor* m = session_->known_method(class_name_, method_name);
  if (m == nullptr) {
    throw Error(ErrorCode::kNotFound,
                "method '" + method_name + "' not registered for class '" + class_name_ + "'");
  }
  const Routine* routine = catalog_->find(m->routine_key);
  if (routine == nullptr) {
    throw Error(ErrorCode::kUnknownRoutine, "unknown routine '" + m->routine_key + "'");
  }
  if (placement.kind != PlacementKind::kReturnByValue) {
    throw Error(ErrorCode::kInvalidArgument, "local stubs only return results by value");
  }
  // Referenced objects are fetched; inline arguments are used as they are.
  std::vector<BlockPayload> fetched;
  fetched.reserve(args.size());
  std::vector<PayloadView> views;
  views.reserve(args.size());
  for (const auto& a : args) {
    if (const auto* rid = std::get_if<ObjectId>(&a)) {
      fetched.push_back(session_->fetch_full(*rid));
      views.push_back(PayloadView::of(fetched.back()));
    } else {
      views.push_back(PayloadView::of(std::get<BlockPayload>(a)));
    }
  }
  if (views.size() != m->arg_schema.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                method_name + ": expected " + std::to_string(m->arg_schema.size()) +
                    " arguments, got " + std::to_string(views.size()));
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (!payload_matches(m->arg_schema[i], views[i].kind,
                         views[i].values.size() + views[i].counts.size())) {
      throw Error(ErrorCode::kInvalidArgument,
                  method_name + ": argument " + std::to_string(i) + " has the wrong type");
    }
  }
  auto& payload = std::get<BlockPayload>(state_);
  if (routine->mutates()) {
    MutablePayloadView mv{payload.kind, payload.rows, payload.cols, payload.values};
    routine->mutating(mv, views);
    return std::monostate{};
  }
  return routine->pure(PayloadView::of(payload), views);
}

ObjectId Stub::persist(TierKind tier) {
  if (is_remote()) {
    throw Error(ErrorCode::kAlreadyExists, "stub already persisted as " + id()->to_string());
  }
  ObjectId id = session_->make_persistent(class_name_, std::get<BlockPayload>(state_), tier);
  state_ = id;
  return id;
}

}  // namespace aos
