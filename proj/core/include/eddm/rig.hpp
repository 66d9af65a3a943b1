#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eddm/linalg.hpp"

namespace eddm {

/// Local joint transform, composed as translation * rotation * shear * scale.
/// shear holds the upper-triangular factors (xy, xz, yz).
struct LocalTransform {
  Vec3 translation;
  Quat rotation;
  Vec3 scale{1.0, 1.0, 1.0};
  Vec3 shear;

  AffineTransform to_affine() const;
};

bool operator==(const LocalTransform& a, const LocalTransform& b);

struct Joint {
  std::string name;
  int parent = -1;  ///< -1 for roots
  LocalTransform bind_local;
  /// When set, the parent's local scale is cancelled before this joint's local
  /// transform (segment scale compensation).
  bool scale_compensate = false;
};

/// Joint forest. Parents may appear at any index; construction validates that
/// the parent links are acyclic, names are unique, and computes a topological
/// evaluation order.
struct JointHierarchy {
  std::vector<Joint> joints;
  std::vector<int> evaluation_order;  ///< parents before children

  int joint_count() const { return static_cast<int>(joints.size()); }
  /// Index of a joint by name, or nullopt.
  std::optional<int> find(std::string_view name) const;
};

/// Validate and finish a hierarchy (throws ValidationError on cycles,
/// duplicate names, bad parent indices, or zero bind scale components).
JointHierarchy make_hierarchy(std::vector<Joint> joints);

/// Per-joint local transforms for one frame, aligned with hierarchy order.
struct Pose {
  std::vector<LocalTransform> locals;
};

/// The bind pose (every joint at its bind local).
Pose bind_pose(const JointHierarchy& h);

/// World transform per joint: W_j = W_parent * C_j * L_j, where C_j is the
/// inverse of the parent's local scale acting about j's local origin when
/// scale_compensate is set on j and identity otherwise (the joint's offset
/// stretches with the parent; its rotation/shear/scale do not). Throws
/// ZeroScaleError when a compensating child sits under a parent with a zero
/// scale component.
std::vector<AffineTransform> world_transforms(const JointHierarchy& h, const Pose& pose);

/// Skinning matrix per joint: world(pose) * inverse(world(bind)).
/// The bind pose maps to exact identity matrices. Throws SingularBindError
/// when some bind world transform is not invertible.
using SkinningMatrices = std::vector<AffineTransform>;
SkinningMatrices skinning_matrices(const JointHierarchy& h, const Pose& pose);

/// Rig JSON:
/// {"joints":[{"name":..., "parent":index|-1,
///             "bind_local":{"t":[3],"r":[4 xyzw],"s":[3],"shear":[3]?},
///             "scale_compensate":bool}, ...]}
JointHierarchy load_rig(std::string_view json_text);
JointHierarchy load_rig_file(const std::string& path);
std::string save_rig(const JointHierarchy& h);

/// Pose JSON: {"pose":[{"joint":name, "t":[3]?, "r":[4]?, "s":[3]?, "shear":[3]?}, ...]}.
/// Joints (or fields) not listed hold their bind-local values. Unknown joint
/// names are an error.
Pose load_pose(std::string_view json_text, const JointHierarchy& h);
Pose load_pose_file(const std::string& path, const JointHierarchy& h);
std::string save_pose(const Pose& pose, const JointHierarchy& h);

}  // namespace eddm
