#include "aos/error.hpp"

namespace aos {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kNotFound: return "not found";
    case ErrorCode::kAlreadyExists: return "already exists";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kOutOfSpace: return "out of space";
    case ErrorCode::kUnknownRoutine: return "unknown routine";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kCorrupt: return "corrupt";
    case ErrorCode::kConnection: return "connection";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace aos
