#include "eddm/rig.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "eddm/error.hpp"

namespace eddm {

using nlohmann::json;

AffineTransform LocalTransform::to_affine() const {
  const Mat3 r = rotation.to_mat3();
  const Mat3 sh{{1.0, shear.x, shear.y,
                 0.0, 1.0, shear.z,
                 0.0, 0.0, 1.0}};
  const Mat3 sc = Mat3::diagonal(scale.x, scale.y, scale.z);
  return {r * sh * sc, translation};
}

bool operator==(const LocalTransform& a, const LocalTransform& b) {
  return a.translation.x == b.translation.x && a.translation.y == b.translation.y &&
         a.translation.z == b.translation.z && a.rotation.x == b.rotation.x &&
         a.rotation.y == b.rotation.y && a.rotation.z == b.rotation.z &&
         a.rotation.w == b.rotation.w && a.scale.x == b.scale.x && a.scale.y == b.scale.y &&
         a.scale.z == b.scale.z && a.shear.x == b.shear.x && a.shear.y == b.shear.y &&
         a.shear.z == b.shear.z;
}

std::optional<int> JointHierarchy::find(std::string_view name) const {
  for (size_t i = 0; i < joints.size(); ++i)
    if (joints[i].name == name) return static_cast<int>(i);
  return std::nullopt;
}

JointHierarchy make_hierarchy(std::vector<Joint> joints) {
  const int n = static_cast<int>(joints.size());
  if (n == 0) throw ValidationError("hierarchy has no joints");

  std::unordered_set<std::string> names;
  for (const Joint& j : joints) {
    if (j.name.empty()) throw ValidationError("joint with empty name");
    if (!names.insert(j.name).second)
      throw ValidationError("duplicate joint name '" + j.name + "'");
  }

  std::vector<int> depth(n, -1);
  for (int i = 0; i < n; ++i) {
    // Walk to the root; more than n hops means a cycle.
    int cur = i, hops = 0;
    while (cur != -1) {
      const int p = joints[cur].parent;
      if (p < -1 || p >= n)
        throw ValidationError("joint '" + joints[cur].name + "' has parent index out of range");
      if (p == cur || ++hops > n)
        throw ValidationError("joint parent links contain a cycle at '" + joints[i].name + "'");
      cur = p;
    }
    depth[i] = hops;
  }

  for (const Joint& j : joints)
    if (j.bind_local.scale.x == 0.0 || j.bind_local.scale.y == 0.0 || j.bind_local.scale.z == 0.0)
      throw ValidationError("joint '" + j.name + "' has a zero bind scale component");

  JointHierarchy h;
  h.joints = std::move(joints);
  h.evaluation_order.resize(n);
  for (int i = 0; i < n; ++i) h.evaluation_order[i] = i;
  std::stable_sort(h.evaluation_order.begin(), h.evaluation_order.end(),
                   [&](int a, int b) { return depth[a] < depth[b]; });
  return h;
}

Pose bind_pose(const JointHierarchy& h) {
  Pose p;
  p.locals.reserve(h.joints.size());
  for (const Joint& j : h.joints) p.locals.push_back(j.bind_local);
  return p;
}

std::vector<AffineTransform> world_transforms(const JointHierarchy& h, const Pose& pose) {
  const int n = h.joint_count();
  if (static_cast<int>(pose.locals.size()) != n)
    throw ValidationError("pose has " + std::to_string(pose.locals.size()) + " joints, rig has " +
                          std::to_string(n));

  std::vector<AffineTransform> world(n);
  for (int j : h.evaluation_order) {
    const Joint& joint = h.joints[j];
    const AffineTransform local = pose.locals[j].to_affine();
    if (joint.parent < 0) {
      world[j] = local;
      continue;
    }
    AffineTransform acc = world[joint.parent];
    if (joint.scale_compensate) {
      const Vec3 ps = pose.locals[joint.parent].scale;
      if (ps.x == 0.0 || ps.y == 0.0 || ps.z == 0.0)
        throw ZeroScaleError("joint '" + joint.name +
                             "' compensates a parent with a zero scale component");
      // Segment scale compensate: the inverse of the parent's local scale acts
      // about this joint's own local origin, so the joint's offset still
      // stretches with the parent while its rotation/shear/scale do not.
      const Mat3 c = Mat3::diagonal(1.0 / ps.x, 1.0 / ps.y, 1.0 / ps.z);
      const Vec3 t = pose.locals[j].translation;
      acc = acc * AffineTransform{c, t - c * t};
    }
    world[j] = acc * local;
  }
  return world;
}

SkinningMatrices skinning_matrices(const JointHierarchy& h, const Pose& pose) {
  const Pose bind = bind_pose(h);
  const std::vector<AffineTransform> bind_world = world_transforms(h, bind);

  std::vector<AffineTransform> inv_bind(bind_world.size());
  for (size_t j = 0; j < bind_world.size(); ++j) {
    const std::optional<AffineTransform> inv = inverse(bind_world[j]);
    if (!inv)
      throw SingularBindError("bind world transform of joint '" + h.joints[j].name +
                              "' is singular");
    inv_bind[j] = *inv;
  }

  // A pose identical to the bind must produce exact identities, not
  // W * W^-1 roundoff; compare component-wise and short-circuit.
  if (pose.locals.size() == bind.locals.size() &&
      std::equal(pose.locals.begin(), pose.locals.end(), bind.locals.begin()))
    return SkinningMatrices(bind_world.size(), AffineTransform::identity());

  const std::vector<AffineTransform> pose_world = world_transforms(h, pose);
  SkinningMatrices m(pose_world.size());
  for (size_t j = 0; j < pose_world.size(); ++j) m[j] = pose_world[j] * inv_bind[j];
  return m;
}

namespace {

Vec3 parse_vec3(const json& a, const char* what) {
  if (!a.is_array() || a.size() != 3)
    throw ParseError(std::string(what) + " must be an array of 3 numbers");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

Quat parse_quat(const json& a, const char* what) {
  if (!a.is_array() || a.size() != 4)
    throw ParseError(std::string(what) + " must be an array of 4 numbers (xyzw)");
  Quat q{a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()};
  const double n = q.norm();
  if (!std::isfinite(n) || n < 1e-12)
    throw ParseError(std::string(what) + ": quaternion is zero or not finite");
  return q.normalized();
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json quat_json(const Quat& q) { return json::array({q.x, q.y, q.z, q.w}); }

json parse_root(std::string_view text, const char* what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ParseError(std::string(what) + ": malformed JSON");
  return doc;
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + std::string(what) + " file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

LocalTransform parse_local(const json& o, const LocalTransform& defaults, const char* what) {
  LocalTransform lt = defaults;
  if (o.contains("t")) lt.translation = parse_vec3(o["t"], what);
  if (o.contains("r")) lt.rotation = parse_quat(o["r"], what);
  if (o.contains("s")) {
    lt.scale = parse_vec3(o["s"], what);
    if (lt.scale.x == 0.0 || lt.scale.y == 0.0 || lt.scale.z == 0.0)
      throw ParseError(std::string(what) + ": scale components must be nonzero");
  }
  if (o.contains("shear")) lt.shear = parse_vec3(o["shear"], what);
  return lt;
}

}  // namespace

JointHierarchy load_rig(std::string_view json_text) {
  const json doc = parse_root(json_text, "rig");
  if (!doc.contains("joints") || !doc["joints"].is_array())
    throw ParseError("rig: missing 'joints' array");

  std::vector<Joint> joints;
  joints.reserve(doc["joints"].size());
  for (const json& o : doc["joints"]) {
    Joint j;
    if (!o.contains("name") || !o["name"].is_string())
      throw ParseError("rig: joint without a string 'name'");
    j.name = o["name"].get<std::string>();
    if (!o.contains("parent") || !o["parent"].is_number_integer())
      throw ParseError("rig: joint '" + j.name + "' missing integer 'parent'");
    j.parent = o["parent"].get<int>();
    if (!o.contains("bind_local"))
      throw ParseError("rig: joint '" + j.name + "' missing 'bind_local'");
    j.bind_local = parse_local(o["bind_local"], LocalTransform{}, "rig bind_local");
    j.scale_compensate = o.value("scale_compensate", false);
    joints.push_back(std::move(j));
  }

  try {
    return make_hierarchy(std::move(joints));
  } catch (const ValidationError& e) {
    throw ParseError(std::string("rig: ") + e.what());
  }
}

JointHierarchy load_rig_file(const std::string& path) {
  return load_rig(read_file(path, "rig"));
}

std::string save_rig(const JointHierarchy& h) {
  json joints = json::array();
  for (const Joint& j : h.joints) {
    json o;
    o["name"] = j.name;
    o["parent"] = j.parent;
    o["bind_local"] = {{"t", vec3_json(j.bind_local.translation)},
                       {"r", quat_json(j.bind_local.rotation)},
                       {"s", vec3_json(j.bind_local.scale)},
                       {"shear", vec3_json(j.bind_local.shear)}};
    o["scale_compensate"] = j.scale_compensate;
    joints.push_back(std::move(o));
  }
  return json{{"joints", std::move(joints)}}.dump(2) + "\n";
}

Pose load_pose(std::string_view json_text, const JointHierarchy& h) {
  const json doc = parse_root(json_text, "pose");
  if (!doc.contains("pose") || !doc["pose"].is_array())
    throw ParseError("pose: missing 'pose' array");

  Pose pose = bind_pose(h);
  for (const json& o : doc["pose"]) {
    if (!o.contains("joint") || !o["joint"].is_string())
      throw ParseError("pose: entry without a string 'joint' name");
    const std::string name = o["joint"].get<std::string>();
    const std::optional<int> idx = h.find(name);
    if (!idx) throw ParseError("pose: joint '" + name + "' does not exist in the rig");
    pose.locals[*idx] = parse_local(o, pose.locals[*idx], "pose");
  }
  return pose;
}

Pose load_pose_file(const std::string& path, const JointHierarchy& h) {
  return load_pose(read_file(path, "pose"), h);
}

std::string save_pose(const Pose& pose, const JointHierarchy& h) {
  if (pose.locals.size() != h.joints.size())
    throw ValidationError("pose joint count does not match the rig");
  json entries = json::array();
  for (size_t j = 0; j < h.joints.size(); ++j) {
    const LocalTransform& lt = pose.locals[j];
    json o;
    o["joint"] = h.joints[j].name;
    o["t"] = vec3_json(lt.translation);
    o["r"] = quat_json(lt.rotation);
    o["s"] = vec3_json(lt.scale);
    if (lt.shear.x != 0.0 || lt.shear.y != 0.0 || lt.shear.z != 0.0)
      o["shear"] = vec3_json(lt.shear);
    entries.push_back(std::move(o));
  }
  return json{{"pose", std::move(entries)}}.dump(2) + "\n";
}

}  // namespace eddm
