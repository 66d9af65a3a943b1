#include "eddm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "eddm/error.hpp"

namespace eddm {

namespace {

double smoothstep01(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Ripple envelope: 1 near both tube ends, fading to 0 before the middle
// third, so rippled geometry never reaches the weight ramp.
double ripple_fade(double y_fraction) {
  const double lo = smoothstep01((0.25 - y_fraction) / 0.10);
  const double hi = smoothstep01((y_fraction - 0.75) / 0.10);
  return lo + hi;
}

}  // namespace

TriMesh make_capped_tube(const TubeParams& p) {
  if (p.radial_segments < 3 || p.height_segments < 1)
    throw ValidationError("tube needs at least 3 radial and 1 height segment");
  if (!(p.radius > 0.0) || !(p.length > 0.0))
    throw ValidationError("tube radius and length must be positive");

  const int rs = p.radial_segments;
  const int hs = p.height_segments;
  const int rings = hs + 1;

  TriMesh mesh;
  mesh.positions.reserve(static_cast<size_t>(rings) * rs + 2);
  for (int h = 0; h < rings; ++h) {
    const double y = p.length * h / hs;
    const double fade = p.ripple_amplitude != 0.0 ? ripple_fade(y / p.length) : 0.0;
    for (int k = 0; k < rs; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / rs;
      const double rho =
          p.radius * (1.0 + p.ripple_amplitude * std::sin(p.ripple_frequency * theta) * fade);
      mesh.positions.push_back({rho * std::cos(theta), y, rho * std::sin(theta)});
    }
  }
  const int bottom_center = rings * rs;
  const int top_center = bottom_center + 1;
  mesh.positions.push_back({0.0, 0.0, 0.0});
  mesh.positions.push_back({0.0, p.length, 0.0});

  const auto ring_vertex = [rs](int h, int k) { return h * rs + (k % rs); };
  for (int h = 0; h < hs; ++h) {
    for (int k = 0; k < rs; ++k) {
      const int a = ring_vertex(h, k), b = ring_vertex(h, k + 1);
      const int c = ring_vertex(h + 1, k + 1), d = ring_vertex(h + 1, k);
      mesh.triangles.push_back({a, d, c});
      mesh.triangles.push_back({a, c, b});
    }
  }
  for (int k = 0; k < rs; ++k) {
    mesh.triangles.push_back({bottom_center, ring_vertex(0, k), ring_vertex(0, k + 1)});
    mesh.triangles.push_back({top_center, ring_vertex(hs, k + 1), ring_vertex(hs, k)});
  }
  mesh.validate();
  return mesh;
}

namespace {

JointHierarchy make_tube_rig(double length) {
  Joint j1, j2;
  j1.name = "joint1";
  j1.bind_local.translation = {0.0, length / 3.0, 0.0};
  j2.name = "joint2";
  j2.parent = 0;
  j2.bind_local.translation = {0.0, length / 3.0, 0.0};
  j2.scale_compensate = true;
  return make_hierarchy({j1, j2});
}

// Smoothstep ramp from joint1 to joint2 across the middle third of the tube.
SkinWeights make_tube_weights(const TriMesh& mesh, double length) {
  SkinWeights w;
  w.rows.resize(mesh.positions.size());
  for (size_t i = 0; i < mesh.positions.size(); ++i) {
    const double t = smoothstep01((mesh.positions[i].y - length / 3.0) / (length / 3.0));
    if (t < 1.0) w.rows[i].emplace_back(0, 1.0 - t);
    if (t > 0.0) w.rows[i].emplace_back(1, t);
  }
  return w;
}

Scenario make_tube_scenario(std::string name) {
  TubeParams tube;
  tube.ripple_amplitude = 0.40;
  tube.ripple_frequency = 6;

  Scenario s;
  s.name = std::move(name);
  s.mesh = make_capped_tube(tube);
  s.rig = make_tube_rig(tube.length);
  s.weights = make_tube_weights(s.mesh, tube.length);
  s.pose = bind_pose(s.rig);
  return s;
}

}  // namespace

Scenario make_fig1_scenario() {
  Scenario s = make_tube_scenario("fig1");
  s.pose.locals[0].scale = {1.0, 2.0, 1.0};
  s.pose.locals[1].scale = {0.5, 0.5, 0.5};

  Pose rigid = bind_pose(s.rig);
  rigid.locals[0].translation = {0.25, 1.6, -0.1};
  rigid.locals[0].rotation = Quat::from_axis_angle({0.0, 0.0, 1.0}, 0.5);
  rigid.locals[1].translation = {0.1, 1.45, -0.2};
  rigid.locals[1].rotation = Quat::from_axis_angle({1.0, 0.0, 0.0}, -0.7);
  s.rigid_pose = std::move(rigid);
  return s;
}

Scenario make_fig2_scenario() {
  Scenario s = make_tube_scenario("fig2");
  s.pose.locals[1].scale = {0.05, 0.05, 0.05};
  return s;
}

Scenario make_stress_scenario() {
  // Fan of 64 spokes around a high-valence apex. Spoke angles cluster as
  // (k/64)^3, driving neighboring spokes closer than 0.01 degrees; the two
  // rings undulate so no vertex neighborhood is planar.
  constexpr int kSpokes = 64;
  constexpr double kTau = 2.0 * std::numbers::pi;

  Scenario s;
  s.name = "stress";
  s.mesh.positions.push_back({0.0, 0.9, 0.0});
  for (int k = 0; k < kSpokes; ++k) {
    const double a = kTau * std::pow(double(k) / kSpokes, 3.0);
    s.mesh.positions.push_back({std::cos(a), 0.5 * std::sin(3.0 * a), std::sin(a)});
  }
  for (int k = 0; k < kSpokes; ++k) {
    const double a = kTau * std::pow(double(k) / kSpokes, 3.0);
    s.mesh.positions.push_back(
        {2.0 * std::cos(a), 0.7 * std::sin(2.0 * a + 1.0), 2.0 * std::sin(a)});
  }
  for (int k = 0; k < kSpokes; ++k) {
    const int k1 = (k + 1) % kSpokes;
    const int a = 1 + k, b = 1 + k1;
    const int c = 1 + kSpokes + k1, d = 1 + kSpokes + k;
    s.mesh.triangles.push_back({0, a, b});
    s.mesh.triangles.push_back({a, d, c});
    s.mesh.triangles.push_back({a, c, b});
  }
  s.mesh.validate();

  Joint root;
  root.name = "root";
  s.rig = make_hierarchy({root});

  s.weights.rows.assign(s.mesh.positions.size(), {{0, 1.0}});

  s.pose = bind_pose(s.rig);
  s.pose.locals[0].translation = {0.2, 0.1, -0.3};
  s.pose.locals[0].rotation = Quat::from_axis_angle(normalized(Vec3{0.3, 1.0, 0.2}), 0.8);
  s.pose.locals[0].scale = {1.25, 0.7, 1.1};
  return s;
}

Scenario make_scenario(std::string_view name) {
  if (name == "fig1") return make_fig1_scenario();
  if (name == "fig2") return make_fig2_scenario();
  if (name == "stress") return make_stress_scenario();
  throw ValidationError("unknown scenario '" + std::string(name) +
                        "' (expected fig1, fig2 or stress)");
}

void write_scenario_files(const std::string& outdir, const Scenario& s) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw ValidationError("cannot create directory '" + outdir + "': " + ec.message());

  const fs::path dir(outdir);
  const auto write_text = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    if (!out) throw ValidationError("cannot write '" + (dir / name).string() + "'");
  };
  save_obj_file((dir / "mesh.obj").string(), s.mesh);
  write_text("rig.json", save_rig(s.rig));
  write_text("weights.json", save_skin_weights(s.weights));
  write_text("pose.json", save_pose(s.pose, s.rig));
  if (s.rigid_pose) write_text("pose_rigid.json", save_pose(*s.rigid_pose, s.rig));
}

}  // namespace eddm
