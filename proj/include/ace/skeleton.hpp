#pragma once

#include <string>
#include <vector>

#include "ace/geometry.hpp"

namespace ace {

enum class JointKind { kRevolute3, kRevolute1, kPrismatic, kFixed };

inline std::size_t joint_dof(JointKind k) {
  switch (k) {
    case JointKind::kRevolute3: return 3;
    case JointKind::kRevolute1: return 1;
    case JointKind::kPrismatic: return 1;
    case JointKind::kFixed: return 0;
  }
  return 0;
}

struct Joint {
  std::string name;
  int parent = -1;       // root has -1
  Vec3 offset{};         // meters, in parent frame
  JointKind kind = JointKind::kFixed;
  Vec3 axis{0, 0, 1};    // revolute-1dof / prismatic only
};

enum class EndEffectorRole { kFoot, kHand, kHead };

inline std::string ee_role_name(EndEffectorRole r) {
  switch (r) {
    case EndEffectorRole::kFoot: return "foot";
    case EndEffectorRole::kHand: return "hand";
    case EndEffectorRole::kHead: return "head";
  }
  return "?";
}

inline EndEffectorRole ee_role_from_name(const std::string& s) {
  if (s == "foot") return EndEffectorRole::kFoot;
  if (s == "hand") return EndEffectorRole::kHand;
  if (s == "head") return EndEffectorRole::kHead;
  throw ValidationError("unknown end-effector role: " + s);
}

struct EndEffector {
  std::size_t joint = 0;
  EndEffectorRole role = EndEffectorRole::kFoot;
};

/// Articulated character description: joint tree in topological order plus
/// end-effector and normalization metadata.
struct Skeleton {
  std::string name;
  std::vector<Joint> joints;
  std::vector<EndEffector> end_effectors;
  double body_length = 1.0;

  std::size_t dof() const {
    std::size_t n = 0;
    for (const Joint& j : joints) n += joint_dof(j.kind);
    return n;
  }

  std::vector<std::size_t> foot_indices() const {
    std::vector<std::size_t> out;
    for (const EndEffector& e : end_effectors)
      if (e.role == EndEffectorRole::kFoot) out.push_back(e.joint);
    return out;
  }

  void validate() const {
    require(!joints.empty(), "Skeleton: no joints");
    require(joints[0].parent == -1, "Skeleton: first joint must be the root");
    require(body_length > 0, "Skeleton: body_length must be positive");
    std::vector<bool> has_child(joints.size(), false);
    for (std::size_t i = 1; i < joints.size(); ++i) {
      require(joints[i].parent >= 0 && static_cast<std::size_t>(joints[i].parent) < i,
              "Skeleton: parent index must precede joint (joint " + joints[i].name + ")");
      has_child[joints[i].parent] = true;
    }
    for (const EndEffector& e : end_effectors) {
      require(e.joint < joints.size(), "Skeleton: end-effector joint out of range");
      require(!has_child[e.joint], "Skeleton: end-effector must be a leaf joint (" +
                                       joints[e.joint].name + ")");
    }
  }
};

/// Per-frame configuration: floating-base transform plus joint coordinates
/// (radians for revolute, meters for prismatic; rotation vectors for 3-dof).
struct Pose {
  Vec3 root_position{};
  Quat root_orientation = Quat::identity();
  std::vector<double> joint_values;

  void validate(const Skeleton& skel) const {
    require(std::abs(root_orientation.norm() - 1.0) < 1e-6,
            "Pose: root orientation not a unit quaternion");
    require(joint_values.size() == skel.dof(),
            "Pose: joint value count " + std::to_string(joint_values.size()) +
                " does not match skeleton dof " + std::to_string(skel.dof()));
  }
};

struct Trajectory {
  std::string skeleton_id;
  double dt = 1.0 / 30.0;
  std::vector<Pose> frames;

  void validate(const Skeleton& skel) const {
    require(dt > 0, "Trajectory: dt must be positive");
    for (const Pose& p : frames) p.validate(skel);
  }
};

/// Index of each joint's first entry in Pose::joint_values.
inline std::vector<std::size_t> joint_value_offsets(const Skeleton& skel) {
  std::vector<std::size_t> out(skel.joints.size(), 0);
  std::size_t v = 0;
  for (std::size_t i = 0; i < skel.joints.size(); ++i) {
    out[i] = v;
    v += joint_dof(skel.joints[i].kind);
  }
  return out;
}

/// World-frame transform of every joint.
///
/// The root joint's transform is the pose's floating-base transform (root
/// offset/motion compose on top of it; the shipped skeletons give the root a
/// zero offset and fixed kind so they coincide). Children compose
/// parent -> offset translation -> joint motion, in topological order.
inline std::vector<Transform> forward_kinematics(const Skeleton& skel, const Pose& pose) {
  pose.validate(skel);
  std::vector<Transform> world(skel.joints.size());
  std::size_t v = 0;
  for (std::size_t i = 0; i < skel.joints.size(); ++i) {
    const Joint& j = skel.joints[i];
    Transform local{Quat::identity(), j.offset};
    switch (j.kind) {
      case JointKind::kRevolute3: {
        const Vec3 r{pose.joint_values[v], pose.joint_values[v + 1], pose.joint_values[v + 2]};
        local.rotation = Quat::from_rotvec(r);
        v += 3;
        break;
      }
      case JointKind::kRevolute1:
        local.rotation = Quat::from_axis_angle(j.axis, pose.joint_values[v]);
        v += 1;
        break;
      case JointKind::kPrismatic:
        local.translation += j.axis.normalized() * pose.joint_values[v];
        v += 1;
        break;
      case JointKind::kFixed:
        break;
    }
    const Transform parent = i == 0 ? Transform{pose.root_orientation, pose.root_position}
                                    : world[j.parent];
    world[i] = parent.compose(local);
  }
  return world;
}

/// Local coordinate frame of a pose: origin at the root's horizontal
/// position (height preserved as a feature, not in the frame), x-axis along
/// the facing direction, z-axis global up.
///
/// Throws when the facing direction is within tol of vertical; callers that
/// stream frames use local_frame_or with the previous frame's heading.
inline Transform local_frame(const Pose& pose, double tol = 1e-6) {
  double heading = 0.0;
  if (!heading_of(pose.root_orientation, heading, tol))
    throw NumericalError("local_frame: facing direction degenerate (within tolerance of vertical)");
  return {Quat::yaw(heading), {pose.root_position.x, pose.root_position.y, 0.0}};
}

/// As local_frame, but falls back to a carried heading for degenerate facing.
inline Transform local_frame_or(const Pose& pose, double fallback_heading,
                                double* heading_out = nullptr) {
  double heading = fallback_heading;
  heading_of(pose.root_orientation, heading);
  if (heading_out) *heading_out = heading;
  return {Quat::yaw(heading), {pose.root_position.x, pose.root_position.y, 0.0}};
}

}  // namespace ace
