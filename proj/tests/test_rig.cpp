#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "eddm/error.hpp"
#include "eddm/rig.hpp"
#include "eddm/scenario.hpp"
#include "support.hpp"

using namespace eddm;

namespace {

Joint make_joint(std::string name, int parent, const Vec3& t, bool compensate = false) {
  Joint j;
  j.name = std::move(name);
  j.parent = parent;
  j.bind_local.translation = t;
  j.scale_compensate = compensate;
  return j;
}

// Column-major-free 4x4 helpers for the explicit forward-kinematics oracle.
using Mat4 = std::array<double, 16>;

Mat4 to_mat4(const AffineTransform& a) {
  return {a.linear.v[0], a.linear.v[1], a.linear.v[2], a.translation.x,
          a.linear.v[3], a.linear.v[4], a.linear.v[5], a.translation.y,
          a.linear.v[6], a.linear.v[7], a.linear.v[8], a.translation.z,
          0.0,           0.0,           0.0,           1.0};
}

Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double sum = 0.0;
      for (int k = 0; k < 4; ++k) sum += a[i * 4 + k] * b[k * 4 + j];
      out[i * 4 + j] = sum;
    }
  return out;
}

double mat4_max_diff(const Mat4& a, const AffineTransform& b) {
  const Mat4 bb = to_mat4(b);
  double worst = 0.0;
  for (int k = 0; k < 16; ++k) worst = std::max(worst, std::fabs(a[k] - bb[k]));
  return worst;
}

}  // namespace

TEST_CASE("to_affine composes translation, rotation, shear, scale in order") {
  LocalTransform lt;
  lt.translation = {1.0, 2.0, 3.0};
  lt.rotation = Quat::from_axis_angle({0.0, 0.0, 1.0}, std::numbers::pi / 2.0);
  lt.scale = {2.0, 1.0, 1.0};
  const AffineTransform a = lt.to_affine();
  // Scale doubles x, then the quarter turn sends it to +y.
  CHECK(norm(a.apply({1.0, 0.0, 0.0}) - Vec3{1.0, 4.0, 3.0}) <= 1e-12);

  LocalTransform sheared;
  sheared.scale = {2.0, 3.0, 4.0};
  sheared.shear = {0.5, -0.25, 0.125};
  const Mat3 expected{{2.0, 1.5, -1.0, 0.0, 3.0, 0.5, 0.0, 0.0, 4.0}};
  CHECK(max_abs_diff(sheared.to_affine().linear, expected) <= 1e-12);
}

TEST_CASE("world_transforms composes bind locals at the bind pose") {
  std::vector<Joint> joints = {make_joint("a", -1, {0.0, 1.0, 0.0}),
                               make_joint("b", 0, {0.0, 2.0, 0.0})};
  joints[0].bind_local.rotation = Quat::from_axis_angle({1.0, 0.0, 0.0}, 0.3);
  joints[1].bind_local.scale = {1.5, 1.0, 1.0};
  const JointHierarchy h = make_hierarchy(joints);

  const auto worlds = world_transforms(h, bind_pose(h));
  const AffineTransform expected =
      joints[0].bind_local.to_affine() * joints[1].bind_local.to_affine();
  CHECK(max_abs_diff(worlds[1].linear, expected.linear) <= 1e-12);
  CHECK(norm(worlds[1].translation - expected.translation) <= 1e-12);
}

TEST_CASE("scale compensation cancels the parent's local scale") {
  const JointHierarchy h = make_hierarchy(
      {make_joint("root", -1, {0.0, 1.0, 0.0}), make_joint("tip", 0, {0.0, 1.0, 0.0}, true)});

  Pose pose = bind_pose(h);
  pose.locals[0].scale = {2.0, 2.0, 2.0};
  const auto worlds = world_transforms(h, pose);

  // Parent doubles, the compensated child sees unit scale again; only the
  // child's offset is stretched by the parent.
  CHECK(max_abs_diff(worlds[0].linear, Mat3::diagonal(2.0, 2.0, 2.0)) == 0.0);
  CHECK(max_abs_diff(worlds[1].linear, Mat3::identity()) <= 1e-15);
  CHECK(norm(worlds[1].translation - Vec3{0.0, 3.0, 0.0}) <= 1e-15);
}

TEST_CASE("scale propagates when compensation is off") {
  const JointHierarchy h = make_hierarchy(
      {make_joint("root", -1, {0.0, 1.0, 0.0}), make_joint("tip", 0, {0.0, 1.0, 0.0})});
  Pose pose = bind_pose(h);
  pose.locals[0].scale = {2.0, 2.0, 2.0};
  const auto worlds = world_transforms(h, pose);
  CHECK(max_abs_diff(worlds[1].linear, Mat3::diagonal(2.0, 2.0, 2.0)) <= 1e-15);
}

TEST_CASE("compensating under a zero parent scale is an error") {
  const JointHierarchy h = make_hierarchy(
      {make_joint("root", -1, {}), make_joint("tip", 0, {0.0, 1.0, 0.0}, true)});
  Pose pose = bind_pose(h);
  pose.locals[0].scale = {0.0, 1.0, 1.0};
  CHECK_THROWS_AS((void)world_transforms(h, pose), ZeroScaleError);
}

TEST_CASE("world_transforms rejects a pose of the wrong size") {
  const JointHierarchy h = make_hierarchy({make_joint("root", -1, {})});
  Pose pose;
  CHECK_THROWS_AS((void)world_transforms(h, pose), ValidationError);
}

TEST_CASE("skinning_matrices at the bind pose is exactly the identity") {
  const Scenario s = make_fig1_scenario();
  const SkinningMatrices m = skinning_matrices(s.rig, bind_pose(s.rig));
  for (const AffineTransform& mj : m) {
    CHECK(max_abs_diff(mj.linear, Mat3::identity()) == 0.0);
    CHECK(norm(mj.translation) == 0.0);
  }
}

TEST_CASE("skinning_matrices of a translated root is the translation delta") {
  const JointHierarchy h = make_hierarchy({make_joint("root", -1, {3.0, 1.0, 2.0})});
  Pose pose = bind_pose(h);
  pose.locals[0].translation = {3.0, 2.0, 2.0};
  const SkinningMatrices m = skinning_matrices(h, pose);
  CHECK(max_abs_diff(m[0].linear, Mat3::identity()) <= 1e-15);
  CHECK(norm(m[0].translation - Vec3{0.0, 1.0, 0.0}) <= 1e-15);
}

TEST_CASE("two-joint squash pose yields the expected skinning factors") {
  // Joint 1 scaled (1,2,1), compensated joint 2 scaled uniformly by 0.5.
  const Scenario s = make_fig1_scenario();
  const SkinningMatrices m = skinning_matrices(s.rig, s.pose);
  REQUIRE(m.size() == 2);
  CHECK(max_abs_diff(m[0].linear, Mat3::diagonal(1.0, 2.0, 1.0)) <= 1e-12);
  CHECK(max_abs_diff(m[1].linear, Mat3::diagonal(0.5, 0.5, 0.5)) <= 1e-12);

  // Each skinning matrix carries its joint's bind world origin to the posed
  // one. The root's origin is fixed; the compensated child keeps its size but
  // its offset rides the parent's stretch, so its origin moves up.
  const auto bind_worlds = world_transforms(s.rig, bind_pose(s.rig));
  const auto pose_worlds = world_transforms(s.rig, s.pose);
  for (int j = 0; j < 2; ++j)
    CHECK(norm(m[j].apply(bind_worlds[j].translation) - pose_worlds[j].translation) <= 1e-12);
  CHECK(norm(pose_worlds[0].translation - bind_worlds[0].translation) <= 1e-12);
  CHECK(norm(pose_worlds[1].translation - (bind_worlds[1].translation + Vec3{0.0, 4.0 / 3.0, 0.0})) <=
        1e-12);
}

TEST_CASE("prepending a rigid transform to the root moves every world with it") {
  std::vector<Joint> joints = {make_joint("a", -1, {0.2, 1.0, -0.3}),
                               make_joint("b", 0, {0.0, 1.0, 0.0}, true),
                               make_joint("c", 1, {0.1, 0.8, 0.0})};
  const JointHierarchy h = make_hierarchy(joints);

  std::mt19937_64 rng(61);
  Pose pose = bind_pose(h);
  for (LocalTransform& lt : pose.locals) {
    lt.translation = testsup::uniform_vec3(rng, -1.0, 1.0);
    lt.rotation = testsup::random_rotation_quat(rng);
    lt.scale = {testsup::uniform(rng, 0.5, 1.8), testsup::uniform(rng, 0.5, 1.8),
                testsup::uniform(rng, 0.5, 1.8)};
  }
  const auto base = world_transforms(h, pose);

  const Quat gq = testsup::random_rotation_quat(rng);
  const AffineTransform g{gq.to_mat3(), testsup::uniform_vec3(rng, -2.0, 2.0)};
  Pose moved = pose;
  moved.locals[0].translation = g.apply(pose.locals[0].translation);
  moved.locals[0].rotation = (gq * pose.locals[0].rotation).normalized();
  const auto shifted = world_transforms(h, moved);

  for (size_t j = 0; j < joints.size(); ++j) {
    const AffineTransform expected = g * base[j];
    CHECK(max_abs_diff(shifted[j].linear, expected.linear) <= 1e-12);
    CHECK(norm(shifted[j].translation - expected.translation) <= 1e-12);
  }
}

TEST_CASE("plain chains match explicit 4x4 forward kinematics") {
  std::vector<Joint> joints = {make_joint("j0", -1, {}), make_joint("j1", 0, {}),
                               make_joint("j2", 1, {}), make_joint("j3", 2, {})};
  const JointHierarchy h = make_hierarchy(joints);

  std::mt19937_64 rng(67);
  Pose pose = bind_pose(h);
  for (LocalTransform& lt : pose.locals) {
    lt.translation = testsup::uniform_vec3(rng, -2.0, 2.0);
    lt.rotation = testsup::random_rotation_quat(rng);
    lt.scale = {testsup::uniform(rng, 0.4, 2.0), testsup::uniform(rng, 0.4, 2.0),
                testsup::uniform(rng, 0.4, 2.0)};
  }

  const auto worlds = world_transforms(h, pose);
  Mat4 acc = to_mat4(pose.locals[0].to_affine());
  CHECK(mat4_max_diff(acc, worlds[0]) <= 1e-12);
  for (int j = 1; j < 4; ++j) {
    acc = mat4_mul(acc, to_mat4(pose.locals[j].to_affine()));
    CHECK(mat4_max_diff(acc, worlds[j]) <= 1e-12);
  }
}

TEST_CASE("make_hierarchy validates structure") {
  CHECK_THROWS_AS((void)make_hierarchy({}), ValidationError);
  CHECK_THROWS_AS(
      (void)make_hierarchy({make_joint("dup", -1, {}), make_joint("dup", 0, {})}),
      ValidationError);
  CHECK_THROWS_AS((void)make_hierarchy({make_joint("self", 0, {})}), ValidationError);
  CHECK_THROWS_AS(
      (void)make_hierarchy({make_joint("a", 1, {}), make_joint("b", 0, {})}),
      ValidationError);  // two-cycle
  CHECK_THROWS_AS((void)make_hierarchy({make_joint("a", 5, {})}), ValidationError);

  Joint bad = make_joint("flat", -1, {});
  bad.bind_local.scale = {1.0, 0.0, 1.0};
  CHECK_THROWS_AS((void)make_hierarchy({bad}), ValidationError);
}

TEST_CASE("make_hierarchy orders parents before children") {
  // Child listed first; evaluation order must still start at the root.
  const JointHierarchy h =
      make_hierarchy({make_joint("tip", 1, {0.0, 1.0, 0.0}), make_joint("root", -1, {})});
  REQUIRE(h.evaluation_order.size() == 2);
  CHECK(h.evaluation_order[0] == 1);
  CHECK(h.evaluation_order[1] == 0);
  CHECK(h.find("tip") == 0);
  CHECK_FALSE(h.find("absent").has_value());

  Pose pose = bind_pose(h);
  pose.locals[1].translation = {1.0, 0.0, 0.0};
  const auto worlds = world_transforms(h, pose);
  CHECK(norm(worlds[0].translation - Vec3{1.0, 1.0, 0.0}) <= 1e-15);
}

TEST_CASE("rig JSON round-trip preserves every field") {
  std::vector<Joint> joints = {make_joint("hip", -1, {0.1, 0.9, -0.2}),
                               make_joint("knee", 0, {0.0, -0.45, 0.02}, true)};
  joints[0].bind_local.rotation = Quat::from_axis_angle({0.3, 1.0, -0.2}, 0.8);
  joints[0].bind_local.scale = {1.0, 1.25, 1.0};
  joints[1].bind_local.shear = {0.1, 0.0, -0.05};
  const JointHierarchy h = make_hierarchy(joints);

  const JointHierarchy back = load_rig(save_rig(h));
  REQUIRE(back.joint_count() == 2);
  for (int j = 0; j < 2; ++j) {
    CHECK(back.joints[j].name == h.joints[j].name);
    CHECK(back.joints[j].parent == h.joints[j].parent);
    CHECK(back.joints[j].scale_compensate == h.joints[j].scale_compensate);
    CHECK(back.joints[j].bind_local == h.joints[j].bind_local);
  }
}

TEST_CASE("load_rig error cases") {
  CHECK_THROWS_AS((void)load_rig("not json"), ParseError);
  CHECK_THROWS_AS((void)load_rig("{}"), ParseError);
  CHECK_THROWS_AS((void)load_rig(R"({"joints": [{"name": "a"}]})"), ParseError);
}

TEST_CASE("pose JSON round-trip and defaults") {
  const Scenario s = make_fig1_scenario();
  const Pose back = load_pose(save_pose(s.pose, s.rig), s.rig);
  REQUIRE(back.locals.size() == s.pose.locals.size());
  for (size_t j = 0; j < back.locals.size(); ++j) CHECK(back.locals[j] == s.pose.locals[j]);

  // A pose file may list a subset of joints; the rest hold their bind locals.
  const Pose partial = load_pose(
      R"({"pose": [{"joint": "joint2", "t": [0, 1, 0], "r": [0, 0, 0, 1], "s": [1, 1, 1]}]})",
      s.rig);
  CHECK(partial.locals[0] == s.rig.joints[0].bind_local);
  CHECK(norm(partial.locals[1].translation - Vec3{0.0, 1.0, 0.0}) == 0.0);
}

TEST_CASE("load_pose error cases and quaternion normalization") {
  const Scenario s = make_fig1_scenario();
  CHECK_THROWS_AS((void)load_pose("[]", s.rig), ParseError);
  CHECK_THROWS_AS(
      (void)load_pose(R"({"pose": [{"joint": "nope", "t": [0,0,0], "r": [0,0,0,1], "s": [1,1,1]}]})",
                      s.rig),
      ParseError);
  CHECK_THROWS_AS(
      (void)load_pose(R"({"pose": [{"joint": "joint1", "t": [0,0,0], "r": [0,0,0,1], "s": [0,1,1]}]})",
                      s.rig),
      ParseError);
  CHECK_THROWS_AS(
      (void)load_pose(R"({"pose": [{"joint": "joint1", "t": [0,0,0], "r": [0,0,0,0], "s": [1,1,1]}]})",
                      s.rig),
      ParseError);

  const Pose scaled = load_pose(
      R"({"pose": [{"joint": "joint1", "t": [0,0,0], "r": [0, 0, 0, 2], "s": [1,1,1]}]})", s.rig);
  CHECK(scaled.locals[0].rotation.w == 1.0);  // normalized on load
  CHECK(std::fabs(scaled.locals[0].rotation.norm() - 1.0) <= 1e-12);
}
