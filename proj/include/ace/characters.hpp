#pragma once

#include "ace/skeleton.hpp"

namespace ace {

/// Fixed 17-joint reference human (pelvis root, 5 end-effectors), 1.7 m tall.
/// Rest pose: standing, arms at the sides, pelvis at 0.87 m.
inline Skeleton human17() {
  Skeleton s;
  s.name = "human17";
  s.body_length = 1.7;
  auto add = [&](const std::string& name, int parent, Vec3 off, JointKind kind) {
    s.joints.push_back({name, parent, off, kind, {0, 0, 1}});
    return static_cast<int>(s.joints.size()) - 1;
  };
  const int pelvis = add("pelvis", -1, {0, 0, 0}, JointKind::kFixed);
  const int spine = add("spine", pelvis, {0, 0, 0.12}, JointKind::kRevolute3);
  const int chest = add("chest", spine, {0, 0, 0.16}, JointKind::kRevolute3);
  const int neck = add("neck", chest, {0, 0, 0.18}, JointKind::kRevolute3);
  const int head = add("head", neck, {0, 0, 0.12}, JointKind::kFixed);
  const int l_hip = add("l_hip", pelvis, {0, 0.09, -0.03}, JointKind::kRevolute3);
  const int l_knee = add("l_knee", l_hip, {0, 0, -0.42}, JointKind::kRevolute3);
  const int l_ankle = add("l_ankle", l_knee, {0, 0, -0.42}, JointKind::kFixed);
  const int r_hip = add("r_hip", pelvis, {0, -0.09, -0.03}, JointKind::kRevolute3);
  const int r_knee = add("r_knee", r_hip, {0, 0, -0.42}, JointKind::kRevolute3);
  const int r_ankle = add("r_ankle", r_knee, {0, 0, -0.42}, JointKind::kFixed);
  // arms rest in a slight A-pose, clear of the torso and thigh capsules
  const int l_shoulder = add("l_shoulder", chest, {0, 0.20, 0.14}, JointKind::kRevolute3);
  const int l_elbow = add("l_elbow", l_shoulder, {0, 0.10, -0.26}, JointKind::kRevolute3);
  const int l_wrist = add("l_wrist", l_elbow, {0, 0.09, -0.24}, JointKind::kFixed);
  const int r_shoulder = add("r_shoulder", chest, {0, -0.20, 0.14}, JointKind::kRevolute3);
  const int r_elbow = add("r_elbow", r_shoulder, {0, -0.10, -0.26}, JointKind::kRevolute3);
  const int r_wrist = add("r_wrist", r_elbow, {0, -0.09, -0.24}, JointKind::kFixed);
  s.end_effectors = {{static_cast<std::size_t>(l_ankle), EndEffectorRole::kFoot},
                     {static_cast<std::size_t>(r_ankle), EndEffectorRole::kFoot},
                     {static_cast<std::size_t>(l_wrist), EndEffectorRole::kHand},
                     {static_cast<std::size_t>(r_wrist), EndEffectorRole::kHand},
                     {static_cast<std::size_t>(head), EndEffectorRole::kHead}};
  s.validate();
  return s;
}

/// Standing pelvis height of the reference human (legs fully extended).
inline constexpr double kHuman17StandingHeight = 0.87;

/// Quadruped with a 6-dof back-mounted arm: 4 legs x (hip_x, hip_y, knee)
/// + arm = 18 dof. Thigh and shank 0.32 m each.
inline Skeleton spot_like() {
  Skeleton s;
  s.name = "spot_like";
  s.body_length = 0.51;
  auto add = [&](const std::string& name, int parent, Vec3 off, JointKind kind, Vec3 axis) {
    s.joints.push_back({name, parent, off, kind, axis});
    return static_cast<int>(s.joints.size()) - 1;
  };
  const int base = add("base", -1, {0, 0, 0}, JointKind::kFixed, {0, 0, 1});
  const char* leg_names[4] = {"fl", "fr", "hl", "hr"};
  const Vec3 mounts[4] = {{0.30, 0.11, 0}, {0.30, -0.11, 0}, {-0.30, 0.11, 0}, {-0.30, -0.11, 0}};
  std::vector<std::size_t> feet;
  for (int leg = 0; leg < 4; ++leg) {
    const std::string p = leg_names[leg];
    const int hip_x = add(p + "_hip_x", base, mounts[leg], JointKind::kRevolute1, {1, 0, 0});
    const int hip_y = add(p + "_hip_y", hip_x, {0, 0, 0}, JointKind::kRevolute1, {0, 1, 0});
    const int knee = add(p + "_knee", hip_y, {0, 0, -0.32}, JointKind::kRevolute1, {0, 1, 0});
    const int foot = add(p + "_foot", knee, {0, 0, -0.32}, JointKind::kFixed, {0, 0, 1});
    feet.push_back(static_cast<std::size_t>(foot));
  }
  const int a0 = add("arm_yaw", base, {0.15, 0, 0.08}, JointKind::kRevolute1, {0, 0, 1});
  const int a1 = add("arm_shoulder", a0, {0.03, 0, 0.05}, JointKind::kRevolute1, {0, 1, 0});
  const int a2 = add("arm_elbow", a1, {0.25, 0, 0}, JointKind::kRevolute1, {0, 1, 0});
  const int a3 = add("arm_wrist_roll", a2, {0.20, 0, 0}, JointKind::kRevolute1, {1, 0, 0});
  const int a4 = add("arm_wrist_pitch", a3, {0.05, 0, 0}, JointKind::kRevolute1, {0, 1, 0});
  const int a5 = add("arm_wrist_yaw", a4, {0.03, 0, 0}, JointKind::kRevolute1, {0, 0, 1});
  const int gripper = add("gripper", a5, {0.06, 0, 0}, JointKind::kFixed, {0, 0, 1});
  for (std::size_t f : feet) s.end_effectors.push_back({f, EndEffectorRole::kFoot});
  s.end_effectors.push_back({static_cast<std::size_t>(gripper), EndEffectorRole::kHand});
  s.validate();
  return s;
}

/// Hexapod with two 3-dof claws: 6 legs x 3 + 2 arms x 3 = 24 dof.
inline Skeleton crab_like() {
  Skeleton s;
  s.name = "crab_like";
  s.body_length = 0.4;
  auto add = [&](const std::string& name, int parent, Vec3 off, JointKind kind, Vec3 axis) {
    s.joints.push_back({name, parent, off, kind, axis});
    return static_cast<int>(s.joints.size()) - 1;
  };
  const int base = add("base", -1, {0, 0, 0}, JointKind::kFixed, {0, 0, 1});
  const double mount_x[3] = {0.14, 0.0, -0.14};
  const char* row[3] = {"f", "m", "h"};
  for (int i = 0; i < 3; ++i) {
    for (int side = 0; side < 2; ++side) {
      const std::string p = std::string(row[i]) + (side == 0 ? "l" : "r");
      const double y = side == 0 ? 0.12 : -0.12;
      const int hip_x = add(p + "_hip_x", base, {mount_x[i], y, 0}, JointKind::kRevolute1, {1, 0, 0});
      const int hip_y = add(p + "_hip_y", hip_x, {0, 0, 0}, JointKind::kRevolute1, {0, 1, 0});
      const int knee = add(p + "_knee", hip_y, {0, 0, -0.12}, JointKind::kRevolute1, {0, 1, 0});
      const int foot = add(p + "_foot", knee, {0, 0, -0.12}, JointKind::kFixed, {0, 0, 1});
      s.end_effectors.push_back({static_cast<std::size_t>(foot), EndEffectorRole::kFoot});
    }
  }
  for (int side = 0; side < 2; ++side) {
    const std::string p = side == 0 ? "l_arm" : "r_arm";
    const double y = side == 0 ? 0.07 : -0.07;
    const int s0 = add(p + "_yaw", base, {0.16, y, 0.04}, JointKind::kRevolute1, {0, 0, 1});
    const int s1 = add(p + "_pitch", s0, {0.03, 0, 0}, JointKind::kRevolute1, {0, 1, 0});
    const int s2 = add(p + "_elbow", s1, {0.10, 0, 0}, JointKind::kRevolute1, {0, 1, 0});
    const int claw = add(p + "_claw", s2, {0.09, 0, 0}, JointKind::kFixed, {0, 0, 1});
    s.end_effectors.push_back({static_cast<std::size_t>(claw), EndEffectorRole::kHand});
  }
  s.validate();
  return s;
}

/// Wheeled mobile manipulator: no legs, a mast-mounted arm with four
/// prismatic joints (lift + 3 telescoping extensions).
inline Skeleton stretch_like() {
  Skeleton s;
  s.name = "stretch_like";
  s.body_length = 1.4;
  auto add = [&](const std::string& name, int parent, Vec3 off, JointKind kind, Vec3 axis) {
    s.joints.push_back({name, parent, off, kind, axis});
    return static_cast<int>(s.joints.size()) - 1;
  };
  const int base = add("base", -1, {0, 0, 0}, JointKind::kFixed, {0, 0, 1});
  const int mast = add("mast", base, {-0.1, 0.1, 0.05}, JointKind::kFixed, {0, 0, 1});
  const int lift = add("lift", mast, {0, 0, 0.1}, JointKind::kPrismatic, {0, 0, 1});
  const int ext1 = add("ext1", lift, {0.05, -0.12, 0}, JointKind::kPrismatic, {0, -1, 0});
  const int ext2 = add("ext2", ext1, {0, -0.10, 0}, JointKind::kPrismatic, {0, -1, 0});
  const int ext3 = add("ext3", ext2, {0, -0.10, 0}, JointKind::kPrismatic, {0, -1, 0});
  const int gripper = add("gripper", ext3, {0, -0.10, -0.06}, JointKind::kFixed, {0, 0, 1});
  (void)mast;
  s.end_effectors.push_back({static_cast<std::size_t>(gripper), EndEffectorRole::kHand});
  s.validate();
  return s;
}

inline Skeleton skeleton_by_name(const std::string& name) {
  if (name == "human17") return human17();
  if (name == "spot_like") return spot_like();
  if (name == "crab_like") return crab_like();
  if (name == "stretch_like") return stretch_like();
  throw ValidationError("unknown skeleton preset: " + name);
}

}  // namespace ace
