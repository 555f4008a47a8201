#include "aos/descriptors.hpp"

#include <set>

#include "aos/error.hpp"

namespace aos {

std::string_view type_tag_name(TypeTag tag) {
  switch (tag) {
    case TypeTag::kNone: return "none";
    case TypeTag::kFloatArray: return "FloatArray";
    case TypeTag::kPointsBlock: return "PointsBlock";
    case TypeTag::kSubmatrix: return "Submatrix";
    case TypeTag::kHistogram: return "Histogram";
    case TypeTag::kCentroids: return "Centroids";
    case TypeTag::kPartialSum: return "PartialSum";
    case TypeTag::kString: return "string";
    case TypeTag::kScalar: return "scalar";
  }
  return "?";
}

bool is_valid_type_tag(std::uint8_t tag) { return tag <= 8; }

bool payload_matches(TypeTag tag, PayloadKind kind, std::uint64_t elements) {
  switch (tag) {
    case TypeTag::kScalar:
      return kind == PayloadKind::kFloatArray && elements == 1;
    case TypeTag::kNone:
    case TypeTag::kString:
      return false;
    default:
      return static_cast<std::uint8_t>(tag) == static_cast<std::uint8_t>(kind);
  }
}

void ClassDescriptor::validate() const {
  if (class_name.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "class name must not be empty");
  }
  std::set<std::string> seen;
  for (const auto& f : fields) {
    if (f.name.empty() || !seen.insert(f.name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate or empty field name '" + f.name + "' in " + class_name);
    }
  }
  seen.clear();
  for (const auto& m : methods) {
    if (m.empty() || !seen.insert(m).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate or empty method name '" + m + "' in " + class_name);
    }
  }
}

}  // namespace aos
