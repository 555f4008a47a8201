#include "aos/payload.hpp"

#include <cstring>
#include <limits>
#include <string>

#include "aos/byte_io.hpp"
#include "aos/error.hpp"

namespace aos {

namespace {

bool is_two_dimensional(PayloadKind kind) {
  return kind == PayloadKind::kPointsBlock || kind == PayloadKind::kCentroids ||
         kind == PayloadKind::kPartialSum;
}

struct Shape {
  std::uint64_t rows = 0;
  std::uint64_t cols = 1;
  std::uint64_t f64_count = 0;
  std::uint64_t u64_count = 0;
};

constexpr std::uint64_t kMaxElements = std::numeric_limits<std::uint64_t>::max() / 16;

bool mul_overflows(std::uint64_t a, std::uint64_t b) {
  return a != 0 && b > kMaxElements / a;
}

// Parses tag + shape fields and derives the element counts they imply.
Shape read_shape(ByteReader& r, PayloadKind kind) {
  Shape s;
  switch (kind) {
    case PayloadKind::kFloatArray:
      s.rows = r.u64();
      s.f64_count = s.rows;
      break;
    case PayloadKind::kHistogram:
      s.rows = r.u64();
      s.u64_count = s.rows;
      break;
    case PayloadKind::kSubmatrix:
      s.rows = r.u64();
      s.cols = s.rows;
      if (mul_overflows(s.rows, s.rows)) throw DecodeError("length mismatch", r.offset());
      s.f64_count = s.rows * s.rows;
      break;
    case PayloadKind::kPointsBlock:
    case PayloadKind::kCentroids:
    case PayloadKind::kPartialSum:
      s.rows = r.u64();
      s.cols = r.u64();
      if (mul_overflows(s.rows, s.cols)) throw DecodeError("length mismatch", r.offset());
      s.f64_count = s.rows * s.cols;
      if (kind == PayloadKind::kPartialSum) s.u64_count = s.rows;
      break;
  }
  if (s.f64_count > kMaxElements || s.u64_count > kMaxElements ||
      s.f64_count + s.u64_count > kMaxElements) {
    throw DecodeError("length mismatch", r.offset());
  }
  return s;
}

PayloadKind read_kind(ByteReader& r) {
  std::uint64_t at = r.offset();
  std::uint8_t tag = r.u8();
  if (!is_valid_payload_kind(tag)) throw DecodeError("unknown variant", at);
  return static_cast<PayloadKind>(tag);
}

}  // namespace

std::string_view payload_kind_name(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::kFloatArray: return "FloatArray";
    case PayloadKind::kPointsBlock: return "PointsBlock";
    case PayloadKind::kSubmatrix: return "Submatrix";
    case PayloadKind::kHistogram: return "Histogram";
    case PayloadKind::kCentroids: return "Centroids";
    case PayloadKind::kPartialSum: return "PartialSum";
  }
  return "?";
}

bool is_valid_payload_kind(std::uint8_t tag) { return tag >= 1 && tag <= 6; }

std::size_t payload_header_size(PayloadKind kind) {
  return is_two_dimensional(kind) ? 17 : 9;
}

BlockPayload BlockPayload::float_array(std::vector<double> values) {
  BlockPayload p;
  p.kind = PayloadKind::kFloatArray;
  p.rows = values.size();
  p.cols = 1;
  p.values = std::move(values);
  return p;
}

BlockPayload BlockPayload::points(std::uint64_t rows, std::uint64_t dims,
                                  std::vector<double> values) {
  BlockPayload p;
  p.kind = PayloadKind::kPointsBlock;
  p.rows = rows;
  p.cols = dims;
  p.values = std::move(values);
  p.validate();
  return p;
}

BlockPayload BlockPayload::submatrix(std::uint64_t k, std::vector<double> values) {
  BlockPayload p;
  p.kind = PayloadKind::kSubmatrix;
  p.rows = k;
  p.cols = k;
  p.values = std::move(values);
  p.validate();
  return p;
}

BlockPayload BlockPayload::histogram(std::vector<std::uint64_t> counts) {
  BlockPayload p;
  p.kind = PayloadKind::kHistogram;
  p.rows = counts.size();
  p.cols = 1;
  p.counts = std::move(counts);
  return p;
}

BlockPayload BlockPayload::centroids(std::uint64_t rows, std::uint64_t dims,
                                     std::vector<double> values) {
  BlockPayload p = points(rows, dims, std::move(values));
  p.kind = PayloadKind::kCentroids;
  return p;
}

BlockPayload BlockPayload::partial_sum(std::uint64_t centers, std::uint64_t dims,
                                       std::vector<double> sums,
                                       std::vector<std::uint64_t> counts) {
  BlockPayload p;
  p.kind = PayloadKind::kPartialSum;
  p.rows = centers;
  p.cols = dims;
  p.values = std::move(sums);
  p.counts = std::move(counts);
  p.validate();
  return p;
}

void BlockPayload::validate() const {
  auto fail = [&](const char* what) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(payload_kind_name(kind)) + ": " + what);
  };
  if (!is_valid_payload_kind(static_cast<std::uint8_t>(kind))) fail("bad kind");
  switch (kind) {
    case PayloadKind::kFloatArray:
      if (cols != 1 || values.size() != rows || !counts.empty()) fail("shape mismatch");
      break;
    case PayloadKind::kHistogram:
      if (cols != 1 || counts.size() != rows || !values.empty()) fail("shape mismatch");
      break;
    case PayloadKind::kSubmatrix:
      if (rows != cols || mul_overflows(rows, cols) || values.size() != rows * cols ||
          !counts.empty()) {
        fail("shape mismatch");
      }
      break;
    case PayloadKind::kPointsBlock:
    case PayloadKind::kCentroids:
      if (mul_overflows(rows, cols) || values.size() != rows * cols || !counts.empty()) {
        fail("shape mismatch");
      }
      break;
    case PayloadKind::kPartialSum:
      if (mul_overflows(rows, cols) || values.size() != rows * cols ||
          counts.size() != rows) {
        fail("shape mismatch");
      }
      break;
  }
}

bool bit_equal(const BlockPayload& a, const BlockPayload& b) {
  if (a.kind != b.kind || a.rows != b.rows || a.cols != b.cols ||
      a.values.size() != b.values.size() || a.counts != b.counts) {
    return false;
  }
  return a.values.empty() ||
         std::memcmp(a.values.data(), b.values.data(), 8 * a.values.size()) == 0;
}

std::uint64_t payload_size_bytes(const BlockPayload& p) {
  return 8 * p.element_count();
}

std::uint64_t encoded_size(const BlockPayload& p) {
  return payload_header_size(p.kind) + payload_size_bytes(p);
}

void encode_payload_into(const BlockPayload& p, Bytes& out) {
  p.validate();
  out.reserve(out.size() + encoded_size(p));
  ByteWriter w(out);
  w.u8(static_cast<std::uint8_t>(p.kind));
  w.u64(p.rows);
  if (is_two_dimensional(p.kind)) w.u64(p.cols);
  if (!p.values.empty()) w.raw(p.values.data(), 8 * p.values.size());
  if (!p.counts.empty()) w.raw(p.counts.data(), 8 * p.counts.size());
}

Bytes encode_payload(const BlockPayload& p) {
  Bytes out;
  encode_payload_into(p, out);
  return out;
}

PayloadView PayloadView::of(const BlockPayload& p) {
  PayloadView v;
  v.kind = p.kind;
  v.rows = p.rows;
  v.cols = p.cols;
  v.values = p.values;
  v.counts = p.counts;
  return v;
}

namespace {

template <typename T>
std::span<T> typed_span(std::uint8_t* data, std::uint64_t n) {
  if (n == 0) return {};
  return {reinterpret_cast<T*>(data), static_cast<std::size_t>(n)};
}

struct ParsedHeader {
  PayloadKind kind;
  Shape shape;
  std::size_t data_offset;
};

ParsedHeader parse_header(ByteView encoded) {
  ByteReader r(encoded);
  PayloadKind kind = read_kind(r);
  Shape shape = read_shape(r, kind);
  std::uint64_t want = 8 * (shape.f64_count + shape.u64_count);
  if (r.remaining() != want) throw DecodeError("length mismatch", r.offset());
  return {kind, shape, payload_header_size(kind)};
}

}  // namespace

PayloadView PayloadView::over(ByteView encoded) {
  ParsedHeader h = parse_header(encoded);
  auto* data = const_cast<std::uint8_t*>(encoded.data()) + h.data_offset;
  PayloadView v;
  v.kind = h.kind;
  v.rows = h.shape.rows;
  v.cols = h.shape.cols;
  if (h.shape.f64_count + h.shape.u64_count == 0) return v;
  if (reinterpret_cast<std::uintptr_t>(data) % alignof(double) != 0) {
    // Unaligned input (e.g. a wire buffer): caller must decode to an owning
    // payload instead.
    throw Error(ErrorCode::kInternal, "payload data not 8-byte aligned");
  }
  v.values = typed_span<const double>(data, h.shape.f64_count);
  v.counts = typed_span<const std::uint64_t>(data + 8 * h.shape.f64_count,
                                             h.shape.u64_count);
  return v;
}

PayloadHeader parse_payload_header(ByteView encoded) {
  ParsedHeader h = parse_header(encoded);
  return {h.kind, h.shape.rows, h.shape.cols, h.data_offset,
          8 * (h.shape.f64_count + h.shape.u64_count)};
}

BlockPayload decode_payload(ByteView bytes) {
  ParsedHeader h = parse_header(bytes);
  BlockPayload p;
  p.kind = h.kind;
  p.rows = h.shape.rows;
  p.cols = h.shape.cols;
  const std::uint8_t* data = bytes.data() + h.data_offset;
  p.values.resize(h.shape.f64_count);
  p.counts.resize(h.shape.u64_count);
  if (!p.values.empty()) std::memcpy(p.values.data(), data, 8 * p.values.size());
  if (!p.counts.empty()) {
    std::memcpy(p.counts.data(), data + 8 * p.values.size(), 8 * p.counts.size());
  }
  return p;
}

BlockPayload PayloadView::to_payload() const {
  BlockPayload p;
  p.kind = kind;
  p.rows = rows;
  p.cols = cols;
  p.values.assign(values.begin(), values.end());
  p.counts.assign(counts.begin(), counts.end());
  return p;
}

MutablePayloadView MutablePayloadView::over(std::span<std::uint8_t> encoded) {
  ParsedHeader h = parse_header(encoded);
  std::uint8_t* data = encoded.data() + h.data_offset;
  if (h.shape.f64_count > 0 &&
      reinterpret_cast<std::uintptr_t>(data) % alignof(double) != 0) {
    throw Error(ErrorCode::kInternal, "payload data not 8-byte aligned");
  }
  MutablePayloadView v;
  v.kind = h.kind;
  v.rows = h.shape.rows;
  v.cols = h.shape.cols;
  v.values = typed_span<double>(data, h.shape.f64_count);
  return v;
}

}  // namespace aos
