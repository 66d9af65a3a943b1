#pragma once

#include <span>
#include <vector>

#include "eddm/mesh.hpp"

namespace eddm {

/// Arithmetic precision used while building the Laplacian weights.
///
/// kDouble is the production mode. kSingleExperiment rounds every intermediate
/// result (edge vectors, cotangents, accumulation, normalization) to float and
/// exists to demonstrate how single precision degrades the weights on
/// ill-conditioned meshes; deformation quality is not guaranteed under it.
enum class WeightPrecision { kDouble, kSingleExperiment };

/// Explicit smoothing schedule: x <- (1 - step) x + step (W x), `iterations` times.
struct SmoothingConfig {
  double step = 0.5;    ///< kappa, in (0, 1]
  int iterations = 16;  ///< p, >= 0
};

/// Row-stochastic sparse smoothing matrix over mesh vertices (CSR layout).
/// The sparsity pattern is the one-ring adjacency with columns ascending per
/// row; weights are >= 0 and each row sums to 1.
struct SmoothingWeights {
  std::vector<int> offsets;      ///< size vertex_count + 1
  std::vector<int> neighbors;    ///< column indices, ascending within a row
  std::vector<double> weights;   ///< aligned with neighbors
  WeightPrecision precision = WeightPrecision::kDouble;

  /// Pre-normalization row sums, kept as a diagnostic of weight quality.
  std::vector<double> raw_row_sums;
  /// Rows whose cotangent weights summed below 1e-12 and fell back to uniform.
  std::vector<int> degenerate_rows;

  int vertex_count() const { return static_cast<int>(offsets.size()) - 1; }

  /// Max over rows of |sum(row) - 1|, evaluated in double on the stored weights.
  double max_row_sum_error() const;
};

/// Cotangent-weighted one-ring smoothing matrix.
///
/// Each interior edge accumulates cot(opposite angle)/2 from both incident
/// triangles, boundary edges from one. Triangles with area below
/// 1e-12 * longest_edge^2 contribute nothing. Negative accumulated edge
/// weights clamp to zero, then rows normalize to sum 1. A row summing below
/// 1e-12 before normalization falls back to uniform 1/valence and is recorded
/// in degenerate_rows.
SmoothingWeights cotangent_weights(const TriMesh& mesh,
                                   WeightPrecision precision = WeightPrecision::kDouble);

/// Apply the explicit smoothing iteration to a generic per-vertex payload of
/// `width` doubles (3 for positions, 10 for the blend precompute fields).
/// values.size() must equal vertex_count * width; iterations = 0 returns the
/// input verbatim. Per-vertex neighbor sums always run in ascending column
/// order, so results are bitwise deterministic for any thread count.
std::vector<double> smooth(const SmoothingWeights& w, const SmoothingConfig& config,
                           std::span<const double> values, int width);

/// Position payload convenience wrapper around smooth().
std::vector<Vec3> smooth_positions(const SmoothingWeights& w, const SmoothingConfig& config,
                                   std::span<const Vec3> positions);

}  // namespace eddm
