#include "aos/object_id.hpp"

#include <cstring>
#include <cstdio>

namespace aos {

std::string ObjectId::to_string() const {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

std::optional<ObjectId> ObjectId::parse(const std::string& hex) {
  if (hex.size() != 32) return std::nullopt;
  ObjectId id;
  for (std::size_t i = 0; i < 32; ++i) {
    char c = hex[i];
    std::uint64_t nibble;
    if (c >= '0' && c <= '9') nibble = c - '0';
    else if (c >= 'a' && c <= 'f') nibble = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') nibble = c - 'A' + 10;
    else return std::nullopt;
    std::uint64_t& word = i < 16 ? id.hi : id.lo;
    word = (word << 4) | nibble;
  }
  return id;
}

std::array<std::uint8_t, ObjectId::kEncodedSize> ObjectId::to_bytes() const {
  std::array<std::uint8_t, kEncodedSize> out;
  std::memcpy(out.data(), &lo, 8);
  std::memcpy(out.data() + 8, &hi, 8);
  return out;
}

ObjectId ObjectId::from_bytes(const std::uint8_t* bytes) {
  ObjectId id;
  std::memcpy(&id.lo, bytes, 8);
  std::memcpy(&id.hi, bytes + 8, 8);
  return id;
}

IdGenerator::IdGenerator() : rng_(std::random_device{}() ^
                                  (std::uint64_t{std::random_device{}()} << 32)) {}

IdGenerator::IdGenerator(std::uint64_t seed) : rng_(seed) {}

ObjectId IdGenerator::next() {
  std::lock_guard lock(mu_);
  ObjectId id;
  id.hi = rng_();
  id.lo = rng_();
  return id;
}

void IdGenerator::reseed(std::uint64_t seed) {
  std::lock_guard lock(mu_);
  rng_.seed(seed);
}

}  // namespace aos
