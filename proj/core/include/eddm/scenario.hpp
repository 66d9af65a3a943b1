#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "eddm/deform.hpp"
#include "eddm/mesh.hpp"
#include "eddm/rig.hpp"

namespace eddm {

/// Capped-cylinder generator parameters. The optional angular ripple adds
/// surface detail in smooth bands at both ends of the tube (the middle third
/// stays a clean cylinder, which is where the demo rigs put their weight
/// ramp).
struct TubeParams {
  int radial_segments = 24;
  int height_segments = 48;
  double radius = 0.8;
  double length = 4.0;
  double ripple_amplitude = 0.0;  ///< relative to radius
  int ripple_frequency = 0;       ///< waves around the circumference
};

/// Tube along +Y from y = 0 to y = length, closed by triangle-fan caps.
/// Ring vertices first (bottom to top, ring-major), then the two cap centers.
TriMesh make_capped_tube(const TubeParams& params);

/// A self-contained deformation fixture: mesh, rig, weights and a pose.
struct Scenario {
  std::string name;
  TriMesh mesh;
  JointHierarchy rig;
  SkinWeights weights;
  Pose pose;
  /// Rigid-only variant of the pose (rotations and translations, no scale),
  /// present when the fixture is meant to demonstrate rigid/non-rigid
  /// contrasts.
  std::optional<Pose> rigid_pose;
};

/// Two-joint tube, joints at the third-points, smoothstep weight ramp across
/// the middle third. Pose: joint1 scaled (1, 2, 1), joint2 scaled uniformly
/// by 0.5. Includes a rigid-only pose variant.
Scenario make_fig1_scenario();

/// Same tube and rig; pose squashes joint2 uniformly to 0.05 (a strongly
/// non-rigid transform).
Scenario make_fig2_scenario();

/// High-valence fan with sliver triangles (min angle well under 1 degree) on
/// a non-planar surface, bound to a single joint under a non-rigid pose.
/// Exercises cotangent-weight conditioning.
Scenario make_stress_scenario();

/// Dispatch by name ("fig1", "fig2", "stress"); throws ValidationError on
/// anything else.
Scenario make_scenario(std::string_view name);

/// Write mesh.obj, rig.json, weights.json, pose.json (and pose_rigid.json
/// when the scenario has one) into outdir, creating it if needed.
void write_scenario_files(const std::string& outdir, const Scenario& scenario);

}  // namespace eddm
