#include "eddm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace eddm {

namespace {

// Null direction of the rank-2 symmetric matrix (s - lambda I). Cross products
// of row pairs all lie along the null space; pick the numerically largest.
Vec3 null_direction(const SymMat3& s, double lambda) {
  const Vec3 r0{s.xx - lambda, s.xy, s.xz};
  const Vec3 r1{s.xy, s.yy - lambda, s.yz};
  const Vec3 r2{s.xz, s.yz, s.zz - lambda};

  const Vec3 c01 = cross(r0, r1);
  const Vec3 c12 = cross(r1, r2);
  const Vec3 c02 = cross(r0, r2);
  const double n01 = norm_squared(c01);
  const double n12 = norm_squared(c12);
  const double n02 = norm_squared(c02);

  double best = n01;
  Vec3 v = c01;
  if (n12 > best) { best = n12; v = c12; }
  if (n02 > best) { best = n02; v = c02; }
  if (best > 0.0) return normalized(v);

  // All crosses vanished: (s - lambda I) has rank <= 1. Any direction
  // orthogonal to the largest row is an eigenvector.
  const double m0 = norm_squared(r0), m1 = norm_squared(r1), m2 = norm_squared(r2);
  Vec3 row = r0;
  double mr = m0;
  if (m1 > mr) { mr = m1; row = r1; }
  if (m2 > mr) { mr = m2; row = r2; }
  if (mr > 0.0) return unit_orthogonal(row);
  return {1.0, 0.0, 0.0};
}

struct Eigen2 {
  double hi = 0.0, lo = 0.0;
  double chi = 1.0, shi = 0.0;  // unit eigenvector of hi in the (t0, t1) plane
};

// Exact closed-form eigendecomposition of [[a, b], [b, c]].
Eigen2 eig_sym2(double a, double b, double c) {
  Eigen2 e;
  const double diff = a - c;
  const double disc = std::sqrt(diff * diff + 4.0 * b * b);
  e.hi = 0.5 * (a + c + disc);
  e.lo = 0.5 * (a + c - disc);

  // Eigenvector for hi: (b, hi - a) and (hi - c, b) are parallel; take the
  // better conditioned one.
  const double u0 = b, u1 = e.hi - a;
  const double w0 = e.hi - c, w1 = b;
  const double nu = u0 * u0 + u1 * u1;
  const double nw = w0 * w0 + w1 * w1;
  double vx = 1.0, vy = 0.0;
  if (nu >= nw && nu > 0.0) {
    vx = u0; vy = u1;
  } else if (nw > 0.0) {
    vx = w0; vy = w1;
  } else if (c > a) {
    vx = 0.0; vy = 1.0;  // already diagonal with swapped order
  }
  const double n = std::sqrt(vx * vx + vy * vy);
  e.chi = vx / n;
  e.shi = vy / n;
  return e;
}

void sort_descending(EigenTriple& t) {
  for (int i = 0; i < 2; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (t.values[j] > t.values[i]) {
        std::swap(t.values[i], t.values[j]);
        std::swap(t.vectors[i], t.vectors[j]);
      }
}

}  // namespace

namespace {

// Eigenvalues only, descending; the cheap half of eig_sym3.
std::array<double, 3> eig_values_sym3(const SymMat3& s) {
  const double shift = (s.xx + s.yy + s.zz) / 3.0;
  const double bxx = s.xx - shift, byy = s.yy - shift, bzz = s.zz - shift;

  // Invariants of the trace-free part B = s - shift I.
  const double j2 = 0.5 * (bxx * bxx + byy * byy + bzz * bzz) +
                    s.xy * s.xy + s.xz * s.xz + s.yz * s.yz;
  const double j3 = bxx * (byy * bzz - s.yz * s.yz) -
                    s.xy * (s.xy * bzz - s.yz * s.xz) +
                    s.xz * (s.xy * s.yz - byy * s.xz);

  if (!(j2 > 0.0)) return {shift, shift, shift};

  // Trigonometric roots of mu^3 - j2 mu - j3 = 0 (Cardano, trigonometric case):
  // mu_k = 2 sqrt(j2/3) cos(phi + 2 pi k / 3), cos(3 phi) = 3 sqrt(3) j3 / (2 j2^1.5).
  const double q = std::sqrt(j2 / 3.0);
  const double arg = std::clamp(j3 / (2.0 * q * q * q), -1.0, 1.0);
  const double phi = std::acos(arg) / 3.0;
  constexpr double two_thirds_pi = 2.0 * std::numbers::pi / 3.0;
  const double l_hi = shift + 2.0 * q * std::cos(phi);
  const double l_lo = shift + 2.0 * q * std::cos(phi + two_thirds_pi);
  const double l_mid = std::clamp(3.0 * shift - l_hi - l_lo, l_lo, l_hi);
  return {l_hi, l_mid, l_lo};
}

}  // namespace

namespace {

// Eigenvector assembly for precomputed eigenvalues.
EigenTriple eig_from_values(const SymMat3& s, const std::array<double, 3>& lam) {
  const double l_hi = lam[0], l_mid = lam[1], l_lo = lam[2];

  EigenTriple out;
  out.vectors = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};

  const double scale = std::max(std::fabs(l_hi), std::fabs(l_lo));
  if (l_hi - l_lo <= 1e-12 * scale) {
    // Near-scalar matrix: any basis works; keep the identity for determinism.
    out.values = {l_hi, l_mid, l_lo};
    return out;
  }

  // Eigenvector of the better separated extreme eigenvalue, then an exact 2x2
  // solve in its orthogonal complement. The reduced eigenvalues are Rayleigh
  // quotients of the final vectors, which keeps V^T s V diagonal to roundoff
  // even for nearly repeated pairs.
  const bool take_hi = (l_hi - l_mid) >= (l_mid - l_lo);
  const Vec3 u = null_direction(s, take_hi ? l_hi : l_lo);
  const Vec3 t0 = unit_orthogonal(u);
  const Vec3 t1 = cross(u, t0);

  const Vec3 st0 = s * t0;
  const Vec3 st1 = s * t1;
  const Eigen2 red = eig_sym2(dot(t0, st0), dot(t0, st1), dot(t1, st1));
  const Vec3 w_hi = red.chi * t0 + red.shi * t1;
  const Vec3 w_lo = -red.shi * t0 + red.chi * t1;

  if (take_hi) {
    out.values = {dot(u, s * u), red.hi, red.lo};
    out.vectors = {u, w_hi, w_lo};
  } else {
    out.values = {red.hi, red.lo, dot(u, s * u)};
    out.vectors = {w_hi, w_lo, u};
  }
  sort_descending(out);
  return out;
}

}  // namespace

EigenTriple eig_sym3(const SymMat3& s) { return eig_from_values(s, eig_values_sym3(s)); }

namespace {

bool rank_deficient(double l_max, double l_min) {
  return !(l_max > 0.0) || l_min <= kSigmaTol * l_max;
}

Mat3 inv_sqrt_from_eig(const EigenTriple& eg, bool negate_smallest) {
  const double d0 = 1.0 / std::sqrt(eg.values[0]);
  const double d1 = 1.0 / std::sqrt(eg.values[1]);
  double d2 = 1.0 / std::sqrt(eg.values[2]);
  if (negate_smallest) d2 = -d2;

  Mat3 r = d0 * Mat3::outer(eg.vectors[0], eg.vectors[0]);
  r += d1 * Mat3::outer(eg.vectors[1], eg.vectors[1]);
  r += d2 * Mat3::outer(eg.vectors[2], eg.vectors[2]);
  return r;
}

// S^(-1/2) as the Newton-form interpolation polynomial of lambda^(-1/2)
// through the eigenvalues (a quadratic in S by Cayley-Hamilton). The divided
// differences of 1/sqrt rationalize into cancellation-free products, so this
// needs no eigenvectors and stays stable for clustered or coincident
// eigenvalues. It cannot express the reflection correction, which flips the
// sign of one eigenvalue's term; that case keeps the eigenvector route.
Mat3 inv_sqrt_quadratic(const SymMat3& s, const std::array<double, 3>& lam) {
  const double r1 = std::sqrt(lam[0]), r2 = std::sqrt(lam[1]), r3 = std::sqrt(lam[2]);
  const double f1 = 1.0 / r1;
  const double f12 = -1.0 / (r1 * r2 * (r1 + r2));
  const double f123 = (r1 + r2 + r3) / (r1 * r2 * r3 * (r1 + r2) * (r2 + r3) * (r3 + r1));

  // f1 I + f12 (S - lam1 I) + f123 (S - lam1 I)(S - lam2 I), collected in
  // powers of S; every product below keeps one sign, so nothing cancels.
  const double a = f1 - f12 * lam[0] + f123 * lam[0] * lam[1];
  const double b = f12 - f123 * (lam[0] + lam[1]);
  const double g = f123;

  const double xx2 = s.xx * s.xx + s.xy * s.xy + s.xz * s.xz;
  const double xy2 = s.xx * s.xy + s.xy * s.yy + s.xz * s.yz;
  const double xz2 = s.xx * s.xz + s.xy * s.yz + s.xz * s.zz;
  const double yy2 = s.xy * s.xy + s.yy * s.yy + s.yz * s.yz;
  const double yz2 = s.xy * s.xz + s.yy * s.yz + s.yz * s.zz;
  const double zz2 = s.xz * s.xz + s.yz * s.yz + s.zz * s.zz;
  return SymMat3{a + b * s.xx + g * xx2, b * s.xy + g * xy2,       b * s.xz + g * xz2,
                 a + b * s.yy + g * yy2, b * s.yz + g * yz2,       a + b * s.zz + g * zz2}
      .to_mat3();
}

}  // namespace

std::optional<Mat3> inv_sqrt_sym3(const SymMat3& s, bool negate_smallest) {
  const EigenTriple eg = eig_sym3(s);
  if (rank_deficient(eg.values[0], eg.values[2])) return std::nullopt;
  return inv_sqrt_from_eig(eg, negate_smallest);
}

std::optional<Mat3> polar_rotation(const Mat3& m) {
  const SymMat3 s = SymMat3::gram(m);
  const std::array<double, 3> lam = eig_values_sym3(s);
  if (rank_deficient(lam[0], lam[2])) return std::nullopt;

  const Mat3 r0 = determinant(m) < 0.0
                      ? m * inv_sqrt_from_eig(eig_from_values(s, lam), true)
                      : m * inv_sqrt_quadratic(s, lam);

  // Forming m^T m squares the conditioning, so toward the rank gate either
  // route leaves R^T R - I at roughly eps * lam1/lam3. One Newton-Schulz step
  // squares that residual away; well-conditioned inputs skip it.
  if (lam[2] < 1e-3 * lam[0])
    return r0 * (1.5 * Mat3::identity() - 0.5 * (transpose(r0) * r0));
  return r0;
}

Mat3 svd_rotation(const Mat3& m) {
  // One-sided Jacobi: orthogonalize the columns of w = m * V by plane rotations
  // accumulated into V; at convergence w = U Sigma.
  Mat3 w = m;
  Mat3 v = Mat3::identity();

  for (int sweep = 0; sweep < 60; ++sweep) {
    double worst = 0.0;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const Vec3 cp = w.column(p);
        const Vec3 cq = w.column(q);
        const double app = dot(cp, cp);
        const double aqq = dot(cq, cq);
        const double apq = dot(cp, cq);
        if (app * aqq == 0.0) continue;
        const double rel = std::fabs(apq) / std::sqrt(app * aqq);
        worst = std::max(worst, rel);
        if (rel < 1e-15) continue;

        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = c * t;
        for (int r = 0; r < 3; ++r) {
          const double wp = w(r, p), wq = w(r, q);
          w(r, p) = c * wp - sn * wq;
          w(r, q) = sn * wp + c * wq;
          const double vp = v(r, p), vq = v(r, q);
          v(r, p) = c * vp - sn * vq;
          v(r, q) = sn * vp + c * vq;
        }
      }
    }
    if (worst < 1e-15) break;
  }

  double sigma[3];
  int order[3] = {0, 1, 2};
  for (int i = 0; i < 3; ++i) sigma[i] = norm(w.column(i));
  // Descending singular values; column swaps applied to both U and V leave
  // det(U V^T) unchanged.
  for (int i = 0; i < 2; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (sigma[order[j]] > sigma[order[i]]) std::swap(order[i], order[j]);

  const double smax = sigma[order[0]];
  Vec3 ucol[3], vcol[3];
  for (int i = 0; i < 3; ++i) vcol[i] = v.column(order[i]);
  if (smax == 0.0) return Mat3::identity();

  ucol[0] = normalized(w.column(order[0]));
  ucol[1] = (sigma[order[1]] > 1e-15 * smax) ? normalized(w.column(order[1]))
                                             : unit_orthogonal(ucol[0]);
  ucol[2] = (sigma[order[2]] > 1e-15 * smax) ? normalized(w.column(order[2]))
                                             : normalized(cross(ucol[0], ucol[1]));

  const Mat3 u = Mat3::from_columns(ucol[0], ucol[1], ucol[2]);
  const Mat3 vt = transpose(Mat3::from_columns(vcol[0], vcol[1], vcol[2]));
  const double flip = (determinant(u) * determinant(vt) < 0.0) ? -1.0 : 1.0;
  return u * Mat3::diagonal(1.0, 1.0, flip) * vt;
}

std::optional<AffineFactors> factor_affine(const AffineTransform& m) {
  const std::optional<Mat3> r = polar_rotation(m.linear);
  if (!r) return std::nullopt;
  AffineFactors f;
  f.rigid = {*r, m.translation};
  f.scale_shear = {transpose(*r) * m.linear, Vec3{}};
  return f;
}

}  // namespace eddm
