#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "aos/error.hpp"
#include "aos/object_id.hpp"
#include "aos/payload.hpp"

namespace aos {

// Little-endian append helpers shared by the payload codec, the wire protocol
// and the arena directory.
class ByteWriter {
 public:
  explicit ByteWriter(Bytes& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { raw(&v, sizeof v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void id(const ObjectId& id) {
    auto b = id.to_bytes();
    raw(b.data(), b.size());
  }
  // u32 length prefix + UTF-8 bytes
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }

 private:
  Bytes& out_;
};

// Bounds-checked reader; every failure is a DecodeError at the current offset.
class ByteReader {
 public:
  explicit ByteReader(ByteView in, std::uint64_t base_offset = 0)
      : in_(in), base_(base_offset) {}

  std::uint8_t u8() { return fixed<std::uint8_t>(); }
  std::uint16_t u16() { return fixed<std::uint16_t>(); }
  std::uint32_t u32() { return fixed<std::uint32_t>(); }
  std::uint64_t u64() { return fixed<std::uint64_t>(); }
  double f64() { return fixed<double>(); }
  ObjectId id() {
    need(ObjectId::kEncodedSize);
    ObjectId v = ObjectId::from_bytes(in_.data() + pos_);
    pos_ += ObjectId::kEncodedSize;
    return v;
  }
  std::string str() {
    std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  ByteView take(std::size_t n) {
    need(n);
    ByteView v = in_.subspan(pos_, n);
    pos_ += n;
    return v;
  }
  ByteView rest() { return take(remaining()); }

  std::size_t remaining() const { return in_.size() - pos_; }
  std::uint64_t offset() const { return base_ + pos_; }
  bool done() const { return pos_ == in_.size(); }

  void expect_done(const char* what) const {
    if (!done()) throw DecodeError(std::string("trailing bytes after ") + what, offset());
  }

 private:
  template <typename T>
  T fixed() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::size_t n) const {
    if (remaining() < n) throw DecodeError("truncated data", offset());
  }

  ByteView in_;
  std::uint64_t base_;
  std::size_t pos_ = 0;
};

}  // namespace aos
