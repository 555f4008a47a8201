#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace aos {

static_assert(std::endian::native == std::endian::little,
              "payload views alias little-endian encoded bytes directly");

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Wire/arena tag of a block payload.
enum class PayloadKind : std::uint8_t {
  kFloatArray = 1,
  kPointsBlock = 2,
  kSubmatrix = 3,
  kHistogram = 4,
  kCentroids = 5,
  kPartialSum = 6,
};

std::string_view payload_kind_name(PayloadKind kind);
bool is_valid_payload_kind(std::uint8_t tag);

/// Size of the tag plus shape fields that precede the element data.
std::size_t payload_header_size(PayloadKind kind);

// Shape conventions:
//   FloatArray   rows = element count, cols = 1
//   Histogram    rows = bin count,     cols = 1   (data in `counts`)
//   PointsBlock  rows x cols, row-major
//   Centroids    rows x cols, row-major
//   Submatrix    rows = cols = k
//   PartialSum   rows = centers, cols = dims; `values` holds the per-center
//                sums row-major, `counts` the per-center point counts
struct BlockPayload {
  PayloadKind kind = PayloadKind::kFloatArray;
  std::uint64_t rows = 0;
  std::uint64_t cols = 1;
  std::vector<double> values;
  std::vector<std::uint64_t> counts;

  static BlockPayload float_array(std::vector<double> values);
  static BlockPayload points(std::uint64_t rows, std::uint64_t dims,
                             std::vector<double> values);
  static BlockPayload submatrix(std::uint64_t k, std::vector<double> values);
  static BlockPayload histogram(std::vector<std::uint64_t> counts);
  static BlockPayload centroids(std::uint64_t rows, std::uint64_t dims,
                                std::vector<double> values);
  static BlockPayload partial_sum(std::uint64_t centers, std::uint64_t dims,
                                  std::vector<double> sums,
                                  std::vector<std::uint64_t> counts);

  /// Throws Error(kInvalidArgument) when element counts disagree with shape.
  void validate() const;

  std::uint64_t element_count() const { return values.size() + counts.size(); }

  friend bool operator==(const BlockPayload&, const BlockPayload&) = default;
};

/// Compares element data by bit pattern (NaN-safe, distinguishes -0.0).
bool bit_equal(const BlockPayload& a, const BlockPayload& b);

/// Number of data bytes, excluding the tag and shape header.
std::uint64_t payload_size_bytes(const BlockPayload& p);
/// Full encoded length: header + data.
std::uint64_t encoded_size(const BlockPayload& p);

struct PayloadHeader {
  PayloadKind kind = PayloadKind::kFloatArray;
  std::uint64_t rows = 0;
  std::uint64_t cols = 1;
  std::size_t header_size = 0;
  std::uint64_t data_bytes = 0;
};

/// Validates tag, shape and total length of an encoded payload without
/// touching the element data. Throws DecodeError.
PayloadHeader parse_payload_header(ByteView encoded);

Bytes encode_payload(const BlockPayload& p);
void encode_payload_into(const BlockPayload& p, Bytes& out);
BlockPayload decode_payload(ByteView bytes);

/// Non-owning view of a payload, either over a BlockPayload or directly over
/// its encoded bytes (requires the data section to be 8-byte aligned).
struct PayloadView {
  PayloadKind kind = PayloadKind::kFloatArray;
  std::uint64_t rows = 0;
  std::uint64_t cols = 1;
  std::span<const double> values;
  std::span<const std::uint64_t> counts;

  static PayloadView of(const BlockPayload& p);
  /// Validates the header and aliases the data in place. Throws DecodeError.
  static PayloadView over(ByteView encoded);

  BlockPayload to_payload() const;
  std::uint64_t data_bytes() const {
    return 8 * (values.size() + counts.size());
  }
};

/// Writable view over an encoded payload's f64 data.
struct MutablePayloadView {
  PayloadKind kind = PayloadKind::kFloatArray;
  std::uint64_t rows = 0;
  std::uint64_t cols = 1;
  std::span<double> values;

  static MutablePayloadView over(std::span<std::uint8_t> encoded);
};

}  // namespace aos
