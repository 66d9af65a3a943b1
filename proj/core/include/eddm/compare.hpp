#pragma once

#include <span>
#include <string>
#include <vector>

#include "eddm/linalg.hpp"

namespace eddm {

/// Per-vertex displacement between two position sets of equal length.
struct CompareReport {
  std::vector<Vec3> delta;       ///< b - a
  std::vector<double> distance;  ///< |b - a|
  double max_distance = 0.0;
  double mean_distance = 0.0;
  double rms_distance = 0.0;
  double threshold = 0.0;
  /// Percent of vertices with distance strictly above threshold.
  double over_threshold_pct = 0.0;

  int vertex_count() const { return static_cast<int>(distance.size()); }
  bool within_threshold() const { return max_distance <= threshold; }
};

/// Throws ValidationError when the sets differ in length or are empty.
CompareReport compare_positions(std::span<const Vec3> a, std::span<const Vec3> b,
                                double threshold);

/// CSV: header "vertex,dx,dy,dz,distance", one row per vertex, then summary
/// rows max/mean/rms/over_threshold_pct (value in the last column). Floats
/// carry 17 significant digits so the file parses back to the exact
/// statistics.
std::string compare_csv(const CompareReport& report);

}  // namespace eddm
