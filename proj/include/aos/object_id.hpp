#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>

namespace aos {

/// 128-bit opaque object identifier.
struct ObjectId {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  static constexpr std::size_t kEncodedSize = 16;

  friend bool operator==(const ObjectId&, const ObjectId&) = default;
  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;

  std::string to_string() const;
  static std::optional<ObjectId> parse(const std::string& hex);

  // Little-endian: lo first, then hi.
  std::array<std::uint8_t, kEncodedSize> to_bytes() const;
  static ObjectId from_bytes(const std::uint8_t* bytes);
};

/// Thread-safe id source. A fixed seed yields a reproducible sequence; the
/// default constructor seeds from std::random_device.
class IdGenerator {
 public:
  IdGenerator();
  explicit IdGenerator(std::uint64_t seed);

  ObjectId next();
  void reseed(std::uint64_t seed);

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
};

}  // namespace aos

template <>
struct std::hash<aos::ObjectId> {
  std::size_t operator()(const aos::ObjectId& id) const noexcept {
    return static_cast<std::size_t>(id.lo ^ (id.hi * 0x9e3779b97f4a7c15ULL));
  }
};
