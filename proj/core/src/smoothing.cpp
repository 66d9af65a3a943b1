#include "eddm/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "eddm/error.hpp"
#include "parallel.hpp"

namespace eddm {

namespace {

template <typename Real>
struct V3 {
  Real x, y, z;
};

template <typename Real>
V3<Real> sub(const V3<Real>& a, const V3<Real>& b) {
  return {Real(a.x - b.x), Real(a.y - b.y), Real(a.z - b.z)};
}

template <typename Real>
Real dot3(const V3<Real>& a, const V3<Real>& b) {
  return Real(Real(Real(a.x * b.x) + Real(a.y * b.y)) + Real(a.z * b.z));
}

template <typename Real>
V3<Real> cross3(const V3<Real>& a, const V3<Real>& b) {
  return {Real(Real(a.y * b.z) - Real(a.z * b.y)),
          Real(Real(a.z * b.x) - Real(a.x * b.z)),
          Real(Real(a.x * b.y) - Real(a.y * b.x))};
}

// Cotangent accumulation with every intermediate held in Real. The float
// instantiation is the single-precision experiment; it must not promote to
// double anywhere, which is why the arithmetic above re-narrows each step.
template <typename Real>
void accumulate_cotangents(const TriMesh& mesh,
                           const std::vector<std::vector<int>>& rings,
                           SmoothingWeights& out) {
  const int n = mesh.vertex_count();

  std::vector<V3<Real>> pos(n);
  for (int i = 0; i < n; ++i)
    pos[i] = {Real(mesh.positions[i].x), Real(mesh.positions[i].y), Real(mesh.positions[i].z)};

  // Edge accumulator aligned with the CSR pattern.
  std::vector<Real> acc(out.neighbors.size(), Real(0));
  auto slot = [&](int i, int j) -> Real& {
    const int* begin = out.neighbors.data() + out.offsets[i];
    const int* end = out.neighbors.data() + out.offsets[i + 1];
    return acc[out.offsets[i] + (std::lower_bound(begin, end, j) - begin)];
  };

  for (const auto& t : mesh.triangles) {
    const V3<Real>& a = pos[t[0]];
    const V3<Real>& b = pos[t[1]];
    const V3<Real>& c = pos[t[2]];
    const V3<Real> ab = sub(b, a), ac = sub(c, a), bc = sub(c, b);

    const Real cr_norm = Real(std::sqrt(dot3(cross3(ab, ac), cross3(ab, ac))));
    const Real area = Real(Real(0.5) * cr_norm);
    const Real longest2 = std::max({dot3(ab, ab), dot3(ac, ac), dot3(bc, bc)});
    if (!(area >= Real(1e-12) * longest2)) continue;  // degenerate: contributes zero

    // cot(angle at corner v) = dot(e1, e2) / |cross(e1, e2)| for the edges
    // leaving v; the edge opposite v gains half of it from this triangle.
    const V3<Real> edges_at[3][2] = {{ab, ac}, {sub(a, b), bc}, {sub(a, c), sub(b, c)}};
    for (int k = 0; k < 3; ++k) {
      const V3<Real> cr = cross3(edges_at[k][0], edges_at[k][1]);
      const Real denom = Real(std::sqrt(dot3(cr, cr)));
      if (!(denom > Real(0))) continue;
      const Real half_cot = Real(Real(0.5) * Real(dot3(edges_at[k][0], edges_at[k][1]) / denom));
      const int u = t[(k + 1) % 3];
      const int v = t[(k + 2) % 3];
      slot(u, v) = Real(slot(u, v) + half_cot);
      slot(v, u) = Real(slot(v, u) + half_cot);
    }
  }

  out.raw_row_sums.resize(n);
  for (int i = 0; i < n; ++i) {
    Real sum(0);
    for (int k = out.offsets[i]; k < out.offsets[i + 1]; ++k) {
      if (acc[k] < Real(0)) acc[k] = Real(0);
      sum = Real(sum + acc[k]);
    }
    out.raw_row_sums[i] = double(sum);
    if (sum < Real(1e-12)) {
      out.degenerate_rows.push_back(i);
      const Real uniform = Real(Real(1) / Real(int(rings[i].size())));
      for (int k = out.offsets[i]; k < out.offsets[i + 1]; ++k)
        out.weights[k] = double(uniform);
    } else {
      for (int k = out.offsets[i]; k < out.offsets[i + 1]; ++k)
        out.weights[k] = double(Real(acc[k] / sum));
    }
  }
}

}  // namespace

double SmoothingWeights::max_row_sum_error() const {
  double worst = 0.0;
  for (int i = 0; i < vertex_count(); ++i) {
    double sum = 0.0;
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) sum += weights[k];
    worst = std::max(worst, std::fabs(sum - 1.0));
  }
  return worst;
}

SmoothingWeights cotangent_weights(const TriMesh& mesh, WeightPrecision precision) {
  mesh.validate();
  const std::vector<std::vector<int>> rings = vertex_one_rings(mesh);

  SmoothingWeights w;
  w.precision = precision;
  w.offsets.resize(mesh.vertex_count() + 1, 0);
  for (size_t i = 0; i < rings.size(); ++i)
    w.offsets[i + 1] = w.offsets[i] + static_cast<int>(rings[i].size());
  w.neighbors.reserve(w.offsets.back());
  for (const auto& r : rings) w.neighbors.insert(w.neighbors.end(), r.begin(), r.end());
  w.weights.assign(w.neighbors.size(), 0.0);

  if (precision == WeightPrecision::kSingleExperiment)
    accumulate_cotangents<float>(mesh, rings, w);
  else
    accumulate_cotangents<double>(mesh, rings, w);
  return w;
}

std::vector<double> smooth(const SmoothingWeights& w, const SmoothingConfig& config,
                           std::span<const double> values, int width) {
  const int n = w.vertex_count();
  if (!(config.step > 0.0) || config.step > 1.0)
    throw ValidationError("smoothing step must be in (0, 1]");
  if (config.iterations < 0) throw ValidationError("smoothing iterations must be >= 0");
  if (width <= 0 || values.size() != static_cast<size_t>(n) * width)
    throw ValidationError("payload size does not match vertex_count * width");

  std::vector<double> cur(values.begin(), values.end());
  if (config.iterations == 0) return cur;
  std::vector<double> next(cur.size());

  const double keep = 1.0 - config.step;
  for (int it = 0; it < config.iterations; ++it) {
    detail::parallel_for(n, [&](int begin, int end) {
      for (int i = begin; i < end; ++i) {
        for (int c = 0; c < width; ++c) {
          double acc = 0.0;
          for (int k = w.offsets[i]; k < w.offsets[i + 1]; ++k)
            acc += w.weights[k] * cur[static_cast<size_t>(w.neighbors[k]) * width + c];
          next[static_cast<size_t>(i) * width + c] =
              keep * cur[static_cast<size_t>(i) * width + c] + config.step * acc;
        }
      }
    });
    cur.swap(next);
  }
  return cur;
}

std::vector<Vec3> smooth_positions(const SmoothingWeights& w, const SmoothingConfig& config,
                                   std::span<const Vec3> positions) {
  std::vector<double> flat(positions.size() * 3);
  for (size_t i = 0; i < positions.size(); ++i) {
    flat[3 * i] = positions[i].x;
    flat[3 * i + 1] = positions[i].y;
    flat[3 * i + 2] = positions[i].z;
  }
  const std::vector<double> sm = smooth(w, config, flat, 3);
  std::vector<Vec3> out(positions.size());
  for (size_t i = 0; i < positions.size(); ++i)
    out[i] = {sm[3 * i], sm[3 * i + 1], sm[3 * i + 2]};
  return out;
}

}  // namespace eddm
