#include "aos/wire.hpp"

#include <cstdio>
#include <cstring>

#include "aos/byte_io.hpp"

namespace aos::wire {

bool is_request_type(std::uint8_t t) { return t >= 1 && t <= 8; }

bool is_valid_msg_type(std::uint8_t t) {
  return is_request_type(t) || is_request_type(static_cast<std::uint8_t>(t & ~kReplyBit)) ||
         t == static_cast<std::uint8_t>(MsgType::kError);
}

std::uint8_t reply_type(MsgType request) {
  return static_cast<std::uint8_t>(static_cast<std::uint8_t>(request) | kReplyBit);
}

void encode_frame_into(std::uint8_t msg_type, std::uint64_t request_id, ByteView body,
                       Bytes& out, std::uint32_t max_frame) {
  std::uint64_t length = 9 + static_cast<std::uint64_t>(body.size());
  if (length > max_frame) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame of " + std::to_string(length) + " bytes exceeds max_frame " +
                    std::to_string(max_frame));
  }
  out.reserve(out.size() + kLengthBytes + length);
  ByteWriter w(out);
  w.u32(static_cast<std::uint32_t>(length));
  w.u8(msg_type);
  w.u64(request_id);
  if (!body.empty()) w.raw(body.data(), body.size());
}

Bytes encode_frame(const Frame& f, std::uint32_t max_frame) {
  Bytes out;
  encode_frame_into(f.msg_type, f.request_id, f.body, out, max_frame);
  return out;
}

namespace {

// Decodes one frame at the start of `stream`; returns its total size.
std::size_t decode_one(ByteView stream, std::uint64_t base, std::uint32_t max_frame,
                       Frame* out) {
  ByteReader r(stream, base);
  std::uint32_t length = r.u32();
  if (length < 9) throw DecodeError("frame length below header size", base);
  if (length > max_frame) throw DecodeError("frame exceeds max_frame", base);
  if (r.remaining() < length) throw DecodeError("truncated frame", base);
  std::uint64_t type_at = r.offset();
  std::uint8_t type = r.u8();
  if (!is_valid_msg_type(type)) throw DecodeError("unknown msg_type", type_at);
  out->msg_type = type;
  out->request_id = r.u64();
  ByteView body = r.take(length - 9);
  out->body.assign(body.begin(), body.end());
  return kLengthBytes + length;
}

}  // namespace

Frame decode_frame(ByteView bytes, std::uint32_t max_frame) {
  Frame f;
  std::size_t n = decode_one(bytes, 0, max_frame, &f);
  if (n != bytes.size()) throw DecodeError("trailing bytes after frame", n);
  return f;
}

std::vector<Frame> split_frames(ByteView stream, std::uint32_t max_frame) {
  std::vector<Frame> frames;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    Frame f;
    pos += decode_one(stream.subspan(pos), pos, max_frame, &f);
    frames.push_back(std::move(f));
  }
  return frames;
}

std::string msg_type_name(std::uint8_t t) {
  static constexpr const char* kNames[] = {"",       "REGISTER_CLASS", "REGISTER_METHOD",
                                           "MAKE_PERSISTENT", "GET", "INVOKE",
                                           "DELETE", "STATS", "FLUSH"};
  if (t == static_cast<std::uint8_t>(MsgType::kError)) return "ERROR";
  std::uint8_t base = t & static_cast<std::uint8_t>(~kReplyBit);
  if (base >= 1 && base <= 8) {
    return std::string(kNames[base]) + ((t & kReplyBit) != 0 ? "_REPLY" : "");
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02x", t);
  return buf;
}

WireCounters WireCounters::operator-(const WireCounters& base) const {
  WireCounters d;
  d.bytes_sent = bytes_sent - base.bytes_sent;
  d.bytes_received = bytes_received - base.bytes_received;
  for (std::size_t i = 0; i < msg_counts.size(); ++i) d.msg_counts[i] = msg_counts[i] - base.msg_counts[i];
  return d;
}

WireCounters AtomicWireCounters::snapshot() const {
  WireCounters c;
  c.bytes_sent = sent_.load();
  c.bytes_received = received_.load();
  for (std::size_t i = 0; i < counts_.size(); ++i) c.msg_counts[i] = counts_[i].load();
  return c;
}

// ---------------------------------------------------------------------------

namespace {

TypeTag read_tag(ByteReader& r) {
  std::uint64_t at = r.offset();
  std::uint8_t t = r.u8();
  if (!is_valid_type_tag(t)) throw DecodeError("unknown type tag", at);
  return static_cast<TypeTag>(t);
}

TierKind read_tier(ByteReader& r) {
  std::uint64_t at = r.offset();
  std::uint8_t t = r.u8();
  if (t >= kTierKindCount) throw DecodeError("unknown tier kind", at);
  return static_cast<TierKind>(t);
}

void write_tier_counters(ByteWriter& w, const TierCounters& c) {
  w.u8(static_cast<std::uint8_t>(c.kind));
  w.u64(c.bytes_read);
  w.u64(c.bytes_written);
  w.u64(c.cache_bytes_read);
  w.u64(c.cache_bytes_written);
  w.u64(c.cache_hits);
  w.u64(c.cache_misses);
  w.u64(c.ops);
  w.u64(c.modeled_time_ps);
}

TierCounters read_tier_counters(ByteReader& r) {
  TierCounters c;
  c.kind = read_tier(r);
  c.bytes_read = r.u64();
  c.bytes_written = r.u64();
  c.cache_bytes_read = r.u64();
  c.cache_bytes_written = r.u64();
  c.cache_hits = r.u64();
  c.cache_misses = r.u64();
  c.ops = r.u64();
  c.modeled_time_ps = r.u64();
  return c;
}

}  // namespace

Bytes encode_class(const ClassDescriptor& d) {
  Bytes out;
  ByteWriter w(out);
  w.str(d.class_name);
  w.u32(static_cast<std::uint32_t>(d.fields.size()));
  for (const auto& f : d.fields) {
    w.str(f.name);
    w.u8(static_cast<std::uint8_t>(f.type));
  }
  w.u32(static_cast<std::uint32_t>(d.methods.size()));
  for (const auto& m : d.methods) w.str(m);
  return out;
}

ClassDescriptor decode_class(ByteView body) {
  ByteReader r(body, kFrameHeaderBytes);
  ClassDescriptor d;
  d.class_name = r.str();
  std::uint32_t nf = r.u32();
  for (std::uint32_t i = 0; i < nf; ++i) {
    FieldDescriptor f;
    f.name = r.str();
    f.type = read_tag(r);
    d.fields.push_back(std::move(f));
  }
  std::uint32_t nm = r.u32();
  for (std::uint32_t i = 0; i < nm; ++i) d.methods.push_back(r.str());
  r.expect_done("REGISTER_CLASS body");
  return d;
}

Bytes encode_method(const MethodDescriptor& d) {
  Bytes out;
  ByteWriter w(out);
  w.str(d.class_name);
  w.str(d.method_name);
  w.str(d.routine_key);
  w.u32(static_cast<std::uint32_t>(d.arg_schema.size()));
  for (TypeTag t : d.arg_schema) w.u8(static_cast<std::uint8_t>(t));
  w.u8(static_cast<std::uint8_t>(d.result_schema));
  w.u8(d.mutates_target ? 1 : 0);
  return out;
}

MethodDescriptor decode_method(ByteView body) {
  ByteReader r(body, kFrameHeaderBytes);
  MethodDescriptor d;
  d.class_name = r.str();
  d.method_name = r.str();
  d.routine_key = r.str();
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) d.arg_schema.push_back(read_tag(r));
  d.result_schema = read_tag(r);
  std::uint64_t at = r.offset();
  std::uint8_t m = r.u8();
  if (m > 1) throw DecodeError("bad mutates flag", at);
  d.mutates_target = m == 1;
  r.expect_done("REGISTER_METHOD body");
  return d;
}

Bytes encode_make_persistent(const std::string& class_name, TierKind tier,
                             const BlockPayload& payload) {
  Bytes out;
  ByteWriter w(out);
  w.str(class_name);
  w.u8(static_cast<std::uint8_t>(tier));
  encode_payload_into(payload, out);
  return out;
}

MakePersistentRequest decode_make_persistent(ByteView body) {
  ByteReader r(body, kFrameHeaderBytes);
  MakePersistentRequest req;
  req.class_name = r.str();
  req.tier = read_tier(r);
  std::uint64_t at = r.offset();
  ByteView payload = r.rest();
  try {
    parse_payload_header(payload);
  } catch (const DecodeError& e) {
    throw DecodeError(std::string("payload: ") + e.what(), at);
  }
  req.payload.assign(payload.begin(), payload.end());
  return req;
}

Bytes encode_id(const ObjectId& id) {
  Bytes out;
  ByteWriter(out).id(id);
  return out;
}

ObjectId decode_id(ByteView body) {
  ByteReader r(body, kFrameHeaderBytes);
  ObjectId id = r.id();
  r.expect_done("object id");
  return id;
}

Bytes encode_invoke(const ObjectId& id, const std::string& method_name,
                    ResultPlacement placement, std::span<const InvokeArg> args) {
  Bytes out;
  ByteWriter w(out);
  w.id(id);
  w.str(method_name);
  w.u8(static_cast<std::uint8_t>(placement.kind));
  w.u8(static_cast<std::uint8_t>(placement.tier));
  w.u32(static_cast<std::uint32_t>(args.size()));
  for (const auto& a : args) {
    if (const auto* p = std::get_if<BlockPayload>(&a)) {
      w.u8(0);
      w.u64(encoded_size(*p));
      encode_payload_into(*p, out);
    } else {
      w.u8(1);
      w.id(std::get<ObjectId>(a));
    }
  }
  return out;
}

InvokeRequest decode_invoke(ByteView body) {
  ByteReader r(body, kFrameHeaderBytes);
  InvokeRequest req;
  req.id = r.id();
  req.method_name = r.str();
  std::uint64_t at = r.offset();
  std::uint8_t pk = r.u8();
  if (pk > 2) throw DecodeError("unknown result placement", at);
  req.placement.kind = static_cast<PlacementKind>(pk);
  req.placement.tier = read_tier(r);
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    at = r.offset();
    std::uint8_t tag = r.u8();
    if (tag == 0) {
      std::uint64_t len = r.u64();
      std::uint64_t payload_at = r.offset();
      if (len > r.remaining()) throw DecodeError("truncated data", payload_at);
      ByteView bytes = r.take(static_cast<std::size_t>(len));
      try {
        req.args.emplace_back(decode_payload(bytes));
      } catch (const DecodeError& e) {
        throw DecodeError(std::string("argument payload: ") + e.what(), payload_at);
      }
    } else if (tag == 1) {
      req.args.emplace_back(r.id());
    } else {
      throw DecodeError("unknown argument kind", at);
    }
  }
  r.expect_done("INVOKE body");
  return req;
}

Bytes encode_invoke_result(const InvokeResult& res) {
  Bytes out;
  ByteWriter w(out);
  if (const auto* p = std::get_if<BlockPayload>(&res)) {
    w.u8(1);
    encode_payload_into(*p, out);
  } else if (const auto* id = std::get_if<ObjectId>(&res)) {
    w.u8(2);
    w.id(*id);
  } else {
    w.u8(0);
  }
  return out;
}

InvokeResult decode_invoke_result(ByteView body) {
  ByteReader r(body, kFrameHeaderBytes);
  std::uint64_t at = r.offset();
  std::uint8_t kind = r.u8();
  switch (kind) {
    case 0:
      r.expect_done("INVOKE reply");
      return std::monostate{};
    case 1:
      return decode_payload(r.rest());
    case 2: {
      ObjectId id = r.id();
      r.expect_done("INVOKE reply");
      return id;
    }
    default:
      throw DecodeError("unknown invoke result kind", at);
  }
}

Bytes encode_stats(const StatsSnapshot& s) {
  Bytes out;
  ByteWriter w(out);
  w.u64(s.wire.bytes_sent);
  w.u64(s.wire.bytes_received);
  std::uint32_t n = 0;
  for (auto c : s.wire.msg_counts) n += c != 0;
  w.u32(n);
  for (std::size_t t = 0; t < s.wire.msg_counts.size(); ++t) {
    if (s.wire.msg_counts[t] != 0) {
      w.u8(static_cast<std::uint8_t>(t));
      w.u64(s.wire.msg_counts[t]);
    }
  }
  std::uint8_t tiers = 0;
  for (const auto& t : s.tiers) tiers += t.has_value();
  w.u8(tiers);
  for (const auto& t : s.tiers) {
    if (t) write_tier_counters(w, *t);
  }
  return out;
}

StatsSnapshot decode_stats(ByteView body) {
  ByteReader r(body, kFrameHeaderBytes);
  StatsSnapshot s;
  s.wire.bytes_sent = r.u64();
  s.wire.bytes_received = r.u64();
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint8_t t = r.u8();
    s.wire.msg_counts[t] = r.u64();
  }
  std::uint8_t tiers = r.u8();
  for (std::uint8_t i = 0; i < tiers; ++i) {
    TierCounters c = read_tier_counters(r);
    s.tiers[static_cast<std::size_t>(c.kind)] = c;
  }
  r.expect_done("STATS reply");
  return s;
}

Bytes encode_error(ErrorCode code, const std::string& message) {
  Bytes out;
  ByteWriter w(out);
  w.u16(static_cast<std::uint16_t>(code));
  w.raw(message.data(), message.size());
  return out;
}

ErrorBody decode_error(ByteView body) {
  ByteReader r(body, kFrameHeaderBytes);
  ErrorBody e;
  e.code = static_cast<ErrorCode>(r.u16());
  ByteView msg = r.rest();
  e.message.assign(reinterpret_cast<const char*>(msg.data()), msg.size());
  return e;
}

}  // namespace aos::wire
