#include "eddm/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "eddm/error.hpp"

namespace eddm {

CompareReport compare_positions(std::span<const Vec3> a, std::span<const Vec3> b,
                                double threshold) {
  if (a.size() != b.size())
    throw ValidationError("position sets differ in length (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  if (a.empty()) throw ValidationError("cannot compare empty position sets");

  CompareReport r;
  r.threshold = threshold;
  r.delta.resize(a.size());
  r.distance.resize(a.size());

  double sum = 0.0, sum_sq = 0.0;
  int over = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    r.delta[i] = b[i] - a[i];
    const double d = norm(r.delta[i]);
    r.distance[i] = d;
    r.max_distance = std::max(r.max_distance, d);
    sum += d;
    sum_sq += d * d;
    if (d > threshold) ++over;
  }
  const double n = static_cast<double>(a.size());
  r.mean_distance = sum / n;
  r.rms_distance = std::sqrt(sum_sq / n);
  r.over_threshold_pct = 100.0 * static_cast<double>(over) / n;
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string compare_csv(const CompareReport& report) {
  std::string out = "vertex,dx,dy,dz,distance\n";
  for (int i = 0; i < report.vertex_count(); ++i) {
    const Vec3& d = report.delta[i];
    out += std::to_string(i) + ',' + fmt(d.x) + ',' + fmt(d.y) + ',' + fmt(d.z) + ',' +
           fmt(report.distance[i]) + '\n';
  }
  out += "max,,,," + fmt(report.max_distance) + '\n';
  out += "mean,,,," + fmt(report.mean_distance) + '\n';
  out += "rms,,,," + fmt(report.rms_distance) + '\n';
  out += "over_threshold_pct,,,," + fmt(report.over_threshold_pct) + '\n';
  return out;
}

}  // namespace eddm
