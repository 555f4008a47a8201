#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aos/engine.hpp"
#include "aos/payload.hpp"

namespace aos::kernels {

// ---------------------------------------------------------------------------
// Histogram over an F-distributed array.

/// Bins [0, e1), [e1, e2), ..., [e_last, inf). Edges strictly increasing,
/// finite and positive.
struct HistogramSpec {
  std::vector<double> edges;

  std::size_t bin_count() const { return edges.size() + 1; }
  std::size_t bin_of(double x) const;
  void validate() const;

  /// 140 bins: 139 geometrically spaced edges from 2^-7 to 2^6.
  static const HistogramSpec& standard();
};

inline constexpr std::size_t kHistogramBins = 140;
inline constexpr double kFDistD1 = 10.0;
inline constexpr double kFDistD2 = 50.0;

/// `n` F(d1, d2) variates split into ceil(n / block_elems) FloatArray blocks.
/// Block b is generated from its own stream derived from (seed, b).
std::vector<BlockPayload> gen_f_array(std::uint64_t seed, std::uint64_t n, double d1,
                                      double d2, std::uint64_t block_elems);
/// Block `b` of gen_f_array(seed, n, d1, d2, block_elems).
BlockPayload gen_f_block(std::uint64_t seed, std::uint64_t n, double d1, double d2,
                         std::uint64_t block_elems, std::uint64_t b);

/// Counts per bin; rejects NaN and negative values.
BlockPayload histogram_block(std::span<const double> block, const HistogramSpec& spec);
BlockPayload merge_histograms(std::span<const BlockPayload> parts);

// ---------------------------------------------------------------------------
// Lloyd's k-means with per-block partial sums.

struct KMeansSpec {
  std::uint64_t centers = 20;
  std::uint64_t iterations = 10;
  std::uint64_t dims = 500;

  void validate() const;
};

/// Uniform [0,1)^dims points split into blocks of `block_rows` rows.
std::vector<BlockPayload> gen_points(std::uint64_t seed, std::uint64_t n_points,
                                     std::uint64_t dims, std::uint64_t block_rows);
BlockPayload gen_points_block(std::uint64_t seed, std::uint64_t n_points, std::uint64_t dims,
                              std::uint64_t block_rows, std::uint64_t b);

/// Centroids seeded from the first `centers` points of the dataset.
BlockPayload initial_centroids(std::span<const BlockPayload> blocks, std::uint64_t centers);

/// Assigns each point to its nearest centroid (squared Euclidean, ties to the
/// lowest index) and accumulates sums and counts in row order.
BlockPayload kmeans_partial(const PayloadView& block, const PayloadView& centroids);

/// Sums partials in the given order; an empty cluster keeps `previous`.
BlockPayload kmeans_reduce(std::span<const BlockPayload> partials, const BlockPayload& previous);

// ---------------------------------------------------------------------------
// Blocked matrices.

struct MatrixDescriptor {
  std::uint64_t n = 0;
  std::uint64_t k = 0;

  std::uint64_t grid() const { return k == 0 ? 0 : n / k; }
  void validate() const;
};

/// (n/k)^2 Submatrix blocks in row-major grid order, values uniform in [-1, 1).
std::vector<BlockPayload> gen_matrix(std::uint64_t seed, const MatrixDescriptor& desc);
/// Single block (row, col) of gen_matrix(seed, desc).
BlockPayload gen_matrix_block(std::uint64_t seed, const MatrixDescriptor& desc,
                              std::uint64_t row, std::uint64_t col);
/// Dense row-major n x n matrix from grid-ordered blocks.
std::vector<double> assemble(std::span<const BlockPayload> blocks, const MatrixDescriptor& desc);

BlockPayload matadd_block(const PayloadView& a, const PayloadView& b);

/// acc[i,j] += a[i,t] * b[t,j], accumulated into acc in ascending t.
void matmul_accumulate(std::span<double> acc, std::span<const double> a,
                       std::span<const double> b, std::uint64_t k);
BlockPayload matmul_block(const PayloadView& acc, const PayloadView& a, const PayloadView& b);

BlockPayload mean(const PayloadView& values);

// ---------------------------------------------------------------------------

/// Routine keys registered by default_catalog().
namespace routine {
inline constexpr const char* kMean = "stat.mean";
inline constexpr const char* kHistogram = "hist.histogram";
inline constexpr const char* kKMeansPartial = "kmeans.partial";
inline constexpr const char* kMatAdd = "matrix.add";
inline constexpr const char* kFma = "matrix.fma";  // target a; args b, acc
inline constexpr const char* kFmaInPlace = "matrix.fma_in_place";  // target acc; args a, b
}  // namespace routine

RoutineCatalog default_catalog();

}  // namespace aos::kernels
