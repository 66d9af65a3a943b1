#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

namespace eddm {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 v) { return v *= s; }
inline Vec3 operator*(Vec3 v, double s) { return v *= s; }
inline Vec3 operator-(const Vec3& v) { return {-v.x, -v.y, -v.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm_squared(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm_squared(v)); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return {v.x / n, v.y / n, v.z / n};
}

/// Unit vector orthogonal to v (v need not be unit length, must be nonzero).
inline Vec3 unit_orthogonal(const Vec3& v) {
  const double ax = std::fabs(v.x), ay = std::fabs(v.y), az = std::fabs(v.z);
  Vec3 axis{1.0, 0.0, 0.0};
  if (ay <= ax && ay <= az) axis = {0.0, 1.0, 0.0};
  else if (az <= ax && az <= ay) axis = {0.0, 0.0, 1.0};
  return normalized(cross(v, axis));
}

inline bool all_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Dense 3x3 matrix, row-major storage, double precision.
struct Mat3 {
  std::array<double, 9> v{};  // zero-initialized

  double& operator()(int r, int c) { return v[3 * r + c]; }
  double operator()(int r, int c) const { return v[3 * r + c]; }

  static Mat3 identity() { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
  static Mat3 diagonal(double a, double b, double c) { return {{a, 0, 0, 0, b, 0, 0, 0, c}}; }
  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
    return {{r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z}};
  }
  static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    return {{c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z}};
  }
  /// Rank-one product a * b^T.
  static Mat3 outer(const Vec3& a, const Vec3& b) {
    return {{a.x * b.x, a.x * b.y, a.x * b.z,
             a.y * b.x, a.y * b.y, a.y * b.z,
             a.z * b.x, a.z * b.y, a.z * b.z}};
  }

  Vec3 row(int r) const { return {v[3 * r], v[3 * r + 1], v[3 * r + 2]}; }
  Vec3 column(int c) const { return {v[c], v[3 + c], v[6 + c]}; }

  Mat3& operator+=(const Mat3& o) {
    for (int i = 0; i < 9; ++i) v[i] += o.v[i];
    return *this;
  }
  Mat3& operator-=(const Mat3& o) {
    for (int i = 0; i < 9; ++i) v[i] -= o.v[i];
    return *this;
  }
  Mat3& operator*=(double s) {
    for (double& e : v) e *= s;
    return *this;
  }
};

inline Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
inline Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
inline Mat3 operator*(double s, Mat3 m) { return m *= s; }

inline Vec3 operator*(const Mat3& m, const Vec3& p) {
  return {m.v[0] * p.x + m.v[1] * p.y + m.v[2] * p.z,
          m.v[3] * p.x + m.v[4] * p.y + m.v[5] * p.z,
          m.v[6] * p.x + m.v[7] * p.y + m.v[8] * p.z};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
  return r;
}

inline Mat3 transpose(const Mat3& m) {
  return {{m.v[0], m.v[3], m.v[6], m.v[1], m.v[4], m.v[7], m.v[2], m.v[5], m.v[8]}};
}

inline double determinant(const Mat3& m) {
  return m.v[0] * (m.v[4] * m.v[8] - m.v[5] * m.v[7]) -
         m.v[1] * (m.v[3] * m.v[8] - m.v[5] * m.v[6]) +
         m.v[2] * (m.v[3] * m.v[7] - m.v[4] * m.v[6]);
}

inline double max_abs(const Mat3& m) {
  double r = 0.0;
  for (double e : m.v) r = std::max(r, std::fabs(e));
  return r;
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  double r = 0.0;
  for (int i = 0; i < 9; ++i) r = std::max(r, std::fabs(a.v[i] - b.v[i]));
  return r;
}

inline bool all_finite(const Mat3& m) {
  for (double e : m.v)
    if (!std::isfinite(e)) return false;
  return true;
}

/// Adjugate-based inverse; nullopt when |det| vanishes relative to the entries.
inline std::optional<Mat3> inverse(const Mat3& m) {
  const double det = determinant(m);
  const double scale = max_abs(m);
  if (std::fabs(det) <= 1e-12 * scale * scale * scale || det == 0.0) return std::nullopt;
  const double inv = 1.0 / det;
  Mat3 r;
  r.v[0] = (m.v[4] * m.v[8] - m.v[5] * m.v[7]) * inv;
  r.v[1] = (m.v[2] * m.v[7] - m.v[1] * m.v[8]) * inv;
  r.v[2] = (m.v[1] * m.v[5] - m.v[2] * m.v[4]) * inv;
  r.v[3] = (m.v[5] * m.v[6] - m.v[3] * m.v[8]) * inv;
  r.v[4] = (m.v[0] * m.v[8] - m.v[2] * m.v[6]) * inv;
  r.v[5] = (m.v[2] * m.v[3] - m.v[0] * m.v[5]) * inv;
  r.v[6] = (m.v[3] * m.v[7] - m.v[4] * m.v[6]) * inv;
  r.v[7] = (m.v[1] * m.v[6] - m.v[0] * m.v[7]) * inv;
  r.v[8] = (m.v[0] * m.v[4] - m.v[1] * m.v[3]) * inv;
  return r;
}

/// Symmetric 3x3 matrix; stores the six unique coefficients.
struct SymMat3 {
  double xx = 0.0, xy = 0.0, xz = 0.0, yy = 0.0, yz = 0.0, zz = 0.0;

  static SymMat3 diagonal(double a, double b, double c) { return {a, 0, 0, b, 0, c}; }

  /// Gram matrix m^T m (symmetric and positive semi-definite by construction).
  static SymMat3 gram(const Mat3& m) {
    SymMat3 s;
    s.xx = m.v[0] * m.v[0] + m.v[3] * m.v[3] + m.v[6] * m.v[6];
    s.xy = m.v[0] * m.v[1] + m.v[3] * m.v[4] + m.v[6] * m.v[7];
    s.xz = m.v[0] * m.v[2] + m.v[3] * m.v[5] + m.v[6] * m.v[8];
    s.yy = m.v[1] * m.v[1] + m.v[4] * m.v[4] + m.v[7] * m.v[7];
    s.yz = m.v[1] * m.v[2] + m.v[4] * m.v[5] + m.v[7] * m.v[8];
    s.zz = m.v[2] * m.v[2] + m.v[5] * m.v[5] + m.v[8] * m.v[8];
    return s;
  }

  Mat3 to_mat3() const { return {{xx, xy, xz, xy, yy, yz, xz, yz, zz}}; }

  Vec3 row(int r) const {
    if (r == 0) return {xx, xy, xz};
    if (r == 1) return {xy, yy, yz};
    return {xz, yz, zz};
  }
};

inline Vec3 operator*(const SymMat3& s, const Vec3& p) {
  return {s.xx * p.x + s.xy * p.y + s.xz * p.z,
          s.xy * p.x + s.yy * p.y + s.yz * p.z,
          s.xz * p.x + s.yz * p.y + s.zz * p.z};
}

inline bool all_finite(const SymMat3& s) {
  return std::isfinite(s.xx) && std::isfinite(s.xy) && std::isfinite(s.xz) &&
         std::isfinite(s.yy) && std::isfinite(s.yz) && std::isfinite(s.zz);
}

/// Unit quaternion, xyzw component order.
struct Quat {
  double x = 0.0, y = 0.0, z = 0.0, w = 1.0;

  static Quat from_axis_angle(const Vec3& axis, double radians) {
    const Vec3 u = eddm::normalized(axis);
    const double h = 0.5 * radians;
    const double s = std::sin(h);
    return {u.x * s, u.y * s, u.z * s, std::cos(h)};
  }

  double norm() const { return std::sqrt(x * x + y * y + z * z + w * w); }

  Quat normalized() const {
    const double n = norm();
    return {x / n, y / n, z / n, w / n};
  }

  Mat3 to_mat3() const {
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, xz = x * z, yz = y * z;
    const double wx = w * x, wy = w * y, wz = w * z;
    return {{1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy),
             2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx),
             2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)}};
  }
};

inline Quat operator*(const Quat& a, const Quat& b) {
  return {a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y + a.y * b.w + a.z * b.x - a.x * b.z,
          a.w * b.z + a.z * b.w + a.x * b.y - a.y * b.x,
          a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z};
}

/// Affine map p -> linear * p + translation; the row-4 (0,0,0,1) of a 4x4 is implicit.
struct AffineTransform {
  Mat3 linear = Mat3::identity();
  Vec3 translation;

  static AffineTransform identity() { return {}; }
  static AffineTransform from_translation(const Vec3& t) { return {Mat3::identity(), t}; }

  Vec3 apply(const Vec3& p) const { return linear * p + translation; }
};

inline AffineTransform operator*(const AffineTransform& a, const AffineTransform& b) {
  return {a.linear * b.linear, a.linear * b.translation + a.translation};
}

inline std::optional<AffineTransform> inverse(const AffineTransform& a) {
  const std::optional<Mat3> li = inverse(a.linear);
  if (!li) return std::nullopt;
  return AffineTransform{*li, -(*li * a.translation)};
}

inline bool all_finite(const AffineTransform& a) {
  return all_finite(a.linear) && all_finite(a.translation);
}

inline double max_abs_diff(const AffineTransform& a, const AffineTransform& b) {
  const Vec3 dt = a.translation - b.translation;
  return std::max(max_abs_diff(a.linear, b.linear),
                  std::max({std::fabs(dt.x), std::fabs(dt.y), std::fabs(dt.z)}));
}

}  // namespace eddm
