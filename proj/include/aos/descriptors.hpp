#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aos/payload.hpp"

namespace aos {

/// Semantic type of a class field, method argument or result.
enum class TypeTag : std::uint8_t {
  kNone = 0,
  kFloatArray = 1,
  kPointsBlock = 2,
  kSubmatrix = 3,
  kHistogram = 4,
  kCentroids = 5,
  kPartialSum = 6,
  kString = 7,
  kScalar = 8,  // one-element FloatArray
};

std::string_view type_tag_name(TypeTag tag);
bool is_valid_type_tag(std::uint8_t tag);
/// Whether a payload of `kind` satisfies `tag`.
bool payload_matches(TypeTag tag, PayloadKind kind, std::uint64_t elements);

struct FieldDescriptor {
  std::string name;
  TypeTag type = TypeTag::kNone;

  friend bool operator==(const FieldDescriptor&,
                         const FieldDescriptor&) = default;
};

struct ClassDescriptor {
  std::string class_name;
  std::vector<FieldDescriptor> fields;
  std::vector<std::string> methods;

  /// Non-empty name; field and method names unique.
  void validate() const;

  friend bool operator==(const ClassDescriptor&,
                         const ClassDescriptor&) = default;
};

struct MethodDescriptor {
  std::string class_name;
  std::string method_name;
  std::string routine_key;
  std::vector<TypeTag> arg_schema;
  TypeTag result_schema = TypeTag::kNone;
  bool mutates_target = false;

  friend bool operator==(const MethodDescriptor&,
                         const MethodDescriptor&) = default;
};

}  // namespace aos
