#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aos/descriptors.hpp"
#include "aos/engine.hpp"
#include "aos/error.hpp"
#include "aos/object_id.hpp"
#include "aos/payload.hpp"
#include "aos/tier.hpp"

namespace aos::wire {

// Frame layout (little-endian):
//   u32 length   bytes after this field = 9 + body size
//   u8  msg_type request type, or request type | kReplyBit, or kError
//   u64 request_id  echoed by the reply
//   body
inline constexpr std::size_t kLengthBytes = 4;
inline constexpr std::size_t kFrameHeaderBytes = 13;  // length + type + request id
inline constexpr std::uint32_t kDefaultMaxFrame = 256u << 20;

enum class MsgType : std::uint8_t {
  kRegisterClass = 1,
  kRegisterMethod = 2,
  kMakePersistent = 3,
  kGet = 4,
  kInvoke = 5,
  kDelete = 6,
  kStats = 7,
  kFlush = 8,
  kError = 127,
};

inline constexpr std::uint8_t kReplyBit = 0x80;

bool is_request_type(std::uint8_t t);
bool is_valid_msg_type(std::uint8_t t);
std::uint8_t reply_type(MsgType request);
/// "GET", "GET_REPLY", "ERROR", or "0x??" for unknown values.
std::string msg_type_name(std::uint8_t t);

struct Frame {
  std::uint8_t msg_type = 0;
  std::uint64_t request_id = 0;
  Bytes body;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Throws Error(kInvalidArgument) when the frame would exceed max_frame.
Bytes encode_frame(const Frame& f, std::uint32_t max_frame = kDefaultMaxFrame);
void encode_frame_into(std::uint8_t msg_type, std::uint64_t request_id, ByteView body,
                       Bytes& out, std::uint32_t max_frame = kDefaultMaxFrame);
/// Decodes exactly one frame spanning all of `bytes`. Throws DecodeError.
Frame decode_frame(ByteView bytes, std::uint32_t max_frame = kDefaultMaxFrame);
/// Splits a byte stream into whole frames; throws DecodeError at the offset
/// of the first bad or incomplete frame.
std::vector<Frame> split_frames(ByteView stream, std::uint32_t max_frame = kDefaultMaxFrame);

// ---------------------------------------------------------------------------
// Counters

struct WireCounters {
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::array<std::uint64_t, 256> msg_counts{};  // indexed by msg_type

  std::uint64_t count(MsgType t) const { return msg_counts[static_cast<std::uint8_t>(t)]; }
  WireCounters operator-(const WireCounters& base) const;
  friend bool operator==(const WireCounters&, const WireCounters&) = default;
};

class AtomicWireCounters {
 public:
  void add_sent(std::uint64_t n) { sent_ += n; }
  void add_received(std::uint64_t n) { received_ += n; }
  void count(std::uint8_t msg_type) { counts_[msg_type] += 1; }
  WireCounters snapshot() const;

 private:
  std::atomic<std::uint64_t> sent_{0};
  std::atomic<std::uint64_t> received_{0};
  std::array<std::atomic<std::uint64_t>, 256> counts_{};
};

// ---------------------------------------------------------------------------
// Message bodies

struct MakePersistentRequest {
  std::string class_name;
  TierKind tier = TierKind::kDram;
  Bytes payload;  // encoded BlockPayload
};

struct InvokeRequest {
  ObjectId id;
  std::string method_name;
  ResultPlacement placement;
  std::vector<InvokeArg> args;
};

struct StatsSnapshot {
  WireCounters wire;
  std::array<std::optional<TierCounters>, kTierKindCount> tiers;
};

struct ErrorBody {
  ErrorCode code = ErrorCode::kInternal;
  std::string message;
};

Bytes encode_class(const ClassDescriptor& d);
ClassDescriptor decode_class(ByteView body);
Bytes encode_method(const MethodDescriptor& d);
MethodDescriptor decode_method(ByteView body);
Bytes encode_make_persistent(const std::string& class_name, TierKind tier,
                             const BlockPayload& payload);
MakePersistentRequest decode_make_persistent(ByteView body);
Bytes encode_id(const ObjectId& id);
ObjectId decode_id(ByteView body);
Bytes encode_invoke(const ObjectId& id, const std::string& method_name,
                    ResultPlacement placement, std::span<const InvokeArg> args);
InvokeRequest decode_invoke(ByteView body);
Bytes encode_invoke_result(const InvokeResult& r);
InvokeResult decode_invoke_result(ByteView body);
Bytes encode_stats(const StatsSnapshot& s);
StatsSnapshot decode_stats(ByteView body);
Bytes encode_error(ErrorCode code, const std::string& message);
ErrorBody decode_error(ByteView body);

/// Exact on-wire size of a frame carrying `body_bytes` of body.
constexpr std::uint64_t frame_size(std::uint64_t body_bytes) {
  return kFrameHeaderBytes + body_bytes;
}

}  // namespace aos::wire
