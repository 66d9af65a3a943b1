#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eddm/mesh.hpp"
#include "eddm/numerics.hpp"
#include "eddm/rig.hpp"
#include "eddm/smoothing.hpp"

namespace eddm {

/// Sparse per-vertex skin weights: (joint index, weight) pairs, ascending by
/// joint, each weight > 0, each vertex summing to 1 (rows are normalized on
/// load).
struct SkinWeights {
  std::vector<std::vector<std::pair<int, double>>> rows;

  int vertex_count() const { return static_cast<int>(rows.size()); }
  /// 1 + the largest joint index present.
  int joint_span() const;
};

/// Weights JSON: {"weights": [[[joint, w], ...] per vertex]}. Zero weights are
/// dropped; negative weights, empty vertices, or a nonpositive sum are errors.
SkinWeights load_skin_weights(std::string_view json_text);
SkinWeights load_skin_weights_file(const std::string& path);
std::string save_skin_weights(const SkinWeights& w);

/// Symmetric 4x4 stored as the 10 upper-triangle coefficients, row-major:
/// (0,0) (0,1) (0,2) (0,3) (1,1) (1,2) (1,3) (2,2) (2,3) (3,3).
/// Block view: [A b; b^T c] with A the symmetric 3x3 part, b a 3-vector and
/// c the scalar mass at index 9.
struct Sym4 {
  std::array<double, 10> coeff{};

  /// Homogeneous outer product [u u^T, u; u^T, 1] scaled by w.
  static Sym4 weighted_point(const Vec3& u, double w);

  SymMat3 block_a() const {
    return {coeff[0], coeff[1], coeff[2], coeff[4], coeff[5], coeff[7]};
  }
  Vec3 block_b() const { return {coeff[3], coeff[6], coeff[8]}; }
  double mass() const { return coeff[9]; }
};

struct OmegaEntry {
  int joint = 0;
  Sym4 value;
};

/// Smoothed, pruned blend coefficients: one sparse row of (joint, Sym4) per
/// vertex, entries ascending by joint index, per-vertex masses summing to 1.
struct OmegaTable {
  std::vector<std::vector<OmegaEntry>> rows;
  SmoothingConfig config;
  double prune_eps = 1e-4;

  int vertex_count() const { return static_cast<int>(rows.size()); }
  int joint_span() const;
  /// Max over vertices of |sum of masses - 1| (diagnostic).
  double max_mass_error() const;
};

/// Default pruning threshold on the smoothed per-influence mass.
inline constexpr double kDefaultPruneEps = 1e-4;

/// Build the blend coefficients: per joint, smooth the field w_vj * P_v over
/// the mesh (`config.iterations` steps of `smoothing`), then per vertex drop
/// entries with mass below prune_eps and renormalize the rest to unit mass.
/// iterations = 0 yields exactly the weighted outer products.
/// Throws EmptyInfluenceError when pruning empties a vertex.
OmegaTable precompute_omega(const TriMesh& mesh, const SkinWeights& weights,
                            const SmoothingWeights& smoothing, const SmoothingConfig& config,
                            double prune_eps = kDefaultPruneEps);

/// Little-endian binary cache (magic "EDDM", version 1). Layout: u64 vertex
/// count; per vertex u16 influence count then per influence u32 joint index +
/// 10 f64 upper-triangle coefficients; trailing f64 kappa, u32 iterations,
/// f64 prune_eps.
void save_omega_cache(std::ostream& out, const OmegaTable& table);
void save_omega_cache_file(const std::string& path, const OmegaTable& table);
OmegaTable load_omega_cache(std::istream& in);
OmegaTable load_omega_cache_file(const std::string& path);

/// Per-joint runtime transforms split for the displacement-aware blend:
/// rigid (proper rotation + translation) times symmetric scale_shear.
struct JointDeformOp {
  AffineTransform rigid;
  Mat3 scale_shear = Mat3::identity();
};

/// Factor every skinning matrix. Throws ValidationError when a linear part is
/// rank-deficient (such a pose cannot be factored; fix the rig instead).
std::vector<JointDeformOp> make_joint_ops(std::span<const AffineTransform> skinning);

/// Blended 4x4 top block per vertex, in the named pieces
/// [linear, deformed_center; rest_center^T, 1].
struct VertexBlend {
  Mat3 linear;           ///< Q: 3x3 block
  Vec3 deformed_center;  ///< q: last column
  Vec3 rest_center;      ///< p: last row
};

/// Accumulate rigid_j * D_ij * Omega_ij over the influences of each vertex in
/// ascending joint order, where D_ij carries the displacement
/// d_ij = scale_shear_j * u_i - u_i. Never materializes 4x4 matrices.
/// Throws MissingJointError when omega references a joint with no op.
std::vector<VertexBlend> blend(const OmegaTable& omega, std::span<const JointDeformOp> ops,
                               const TriMesh& rest);

/// Degenerate-blend fallbacks taken during a deform call (vertex indices,
/// ascending). Empty on healthy inputs.
struct DeformStats {
  std::vector<int> fallback_vertices;
};

/// Full runtime: factor the skinning matrices, blend, extract the rotation of
/// linear - deformed_center * rest_center^T per vertex, and apply
/// v = R u + (deformed_center - R rest_center). Vertices whose blended matrix
/// is rank-deficient fall back to the rigid factor of their largest-mass
/// influence and are recorded in stats.
std::vector<Vec3> deform_eddm(const TriMesh& rest, const OmegaTable& omega,
                              std::span<const AffineTransform> skinning,
                              DeformStats* stats = nullptr);

/// Prior art baseline: same pipeline but accumulating the unfactored skinning
/// matrices, so non-rigid joint transforms leak through the smoothed
/// rest-position terms (the squash/stretch distortion this library corrects).
std::vector<Vec3> deform_ddm(const TriMesh& rest, const OmegaTable& omega,
                             std::span<const AffineTransform> skinning,
                             DeformStats* stats = nullptr);

/// Linear blend skinning: v = sum_j w_ij M_j u.
std::vector<Vec3> deform_lbs(const TriMesh& rest, const SkinWeights& weights,
                             std::span<const AffineTransform> skinning);

/// Classic delta mush reference: LBS, smooth with the given weights/config,
/// rebuild per-vertex tangent frames on the smoothed mesh and re-apply the
/// rest-pose detail deltas. Throws DegenerateFrameError when a vertex has no
/// usable tangent edge.
std::vector<Vec3> deform_delta_mush(const TriMesh& rest, const SmoothingWeights& smoothing,
                                    const SmoothingConfig& config, const SkinWeights& weights,
                                    std::span<const AffineTransform> skinning);

}  // namespace eddm
