#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aos {

// Numeric values travel in ERROR frames; keep them stable.
enum class ErrorCode : std::uint16_t {
  kMalformed = 1,
  kNotFound = 2,
  kAlreadyExists = 3,
  kInvalidArgument = 4,
  kOutOfSpace = 5,
  kUnknownRoutine = 6,
  kIo = 7,
  kCorrupt = 8,
  kConnection = 9,
  kInternal = 10,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the payload and frame decoders; carries the byte offset at which
// decoding stopped.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& message, std::uint64_t offset)
      : Error(ErrorCode::kMalformed,
              message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace aos
