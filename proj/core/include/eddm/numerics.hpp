#pragma once

#include <optional>

#include "eddm/linalg.hpp"

namespace eddm {

/// Relative rank-deficiency threshold on the eigenvalues of m^T m: the smallest
/// eigenvalue at or below kSigmaTol times the largest declares the input degenerate.
/// Equivalent to a singular value ratio of 1e-4.
inline constexpr double kSigmaTol = 1e-8;

/// Eigenvalues sorted descending with matching unit eigenvectors.
/// values[0] >= values[1] >= values[2]; vectors are mutually orthogonal.
struct EigenTriple {
  std::array<double, 3> values{};
  std::array<Vec3, 3> vectors{};
};

/// Closed-form eigendecomposition of a symmetric 3x3 matrix.
///
/// Eigenvalues come from the trigonometric solution of the characteristic cubic
/// (acos argument clamped to [-1, 1]). Eigenvectors: the best-separated extreme
/// eigenvalue's vector is the null direction of (s - lambda I); the remaining two
/// are an exact 2x2 solve in its orthogonal complement, so the basis stays
/// orthonormal to machine precision even when two eigenvalues nearly coincide.
/// When all three eigenvalues agree to within 1e-12 relative, the eigenvectors
/// are the identity basis.
EigenTriple eig_sym3(const SymMat3& s);

/// Inverse square root of a symmetric positive semi-definite matrix:
/// V diag(lambda_k^-1/2) V^T, with the smallest-eigenvalue term negated when
/// negate_smallest is set (the reflection correction of the polar kernel).
///
/// Returns nullopt when the smallest eigenvalue is at or below kSigmaTol times
/// the largest (rank-deficient input; the caller applies its fallback).
std::optional<Mat3> inv_sqrt_sym3(const SymMat3& s, bool negate_smallest = false);

/// Nearest proper rotation to m: R = m (m^T m)^-1/2, with the smallest
/// eigenvalue negated in the inverse square root when det(m) < 0 so that the
/// result has determinant +1 even for reflecting inputs.
///
/// Returns nullopt when m^T m is rank-deficient beyond kSigmaTol.
std::optional<Mat3> polar_rotation(const Mat3& m);

/// Nearest proper rotation via a full one-sided Jacobi SVD:
/// R = U diag(1, 1, det(U V^T)) V^T. Slow reference path; handles every finite
/// input, completing missing columns of U for rank-deficient m.
Mat3 svd_rotation(const Mat3& m);

/// Rigid x scale/shear factorization of an affine transform.
struct AffineFactors {
  AffineTransform rigid;        ///< proper rotation + the input translation
  AffineTransform scale_shear;  ///< symmetric linear part, zero translation
};

/// Factor m into rigid * scale_shear with rigid.linear = polar_rotation(m.linear),
/// scale_shear.linear = rigid.linear^T * m.linear. Reflections (det < 0) stay in
/// scale_shear. Returns nullopt when the linear part is rank-deficient.
std::optional<AffineFactors> factor_affine(const AffineTransform& m);

}  // namespace eddm
