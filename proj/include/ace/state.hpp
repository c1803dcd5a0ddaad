#pragma once

#include <vector>

#include "ace/skeleton.hpp"

namespace ace {

/// Layout of the 92-dim human state vector. All positional entries are in
/// the frame's local coordinate frame; height is the world z of the root.
struct HumanStateLayout {
  static constexpr std::size_t kJointCount = 17;
  static constexpr std::size_t kEeCount = 5;
  static constexpr std::size_t kHeight = 0;
  static constexpr std::size_t kOrientation = 1;   // 4, canonical quaternion
  static constexpr std::size_t kLinVel = 5;        // 3
  static constexpr std::size_t kAngVel = 8;        // 3
  static constexpr std::size_t kJointPositions = 11;  // 17 * 3
  static constexpr std::size_t kEePositions = 62;     // 5 * 3
  static constexpr std::size_t kEeVelocities = 77;    // 5 * 3
  static constexpr std::size_t kSize = 92;
};

struct HumanState {
  std::vector<double> values;

  void validate() const {
    require(values.size() == HumanStateLayout::kSize, "HumanState: length must be 92");
    require_finite(values, "HumanState");
    require(values[HumanStateLayout::kHeight] >= 0, "HumanState: root height must be >= 0");
  }
};

/// Layout of the character state vector: 17 fixed entries plus joint pose and
/// per-end-effector position/velocity blocks.
struct CharacterStateLayout {
  std::size_t dof = 0;
  std::size_t ee_count = 0;

  static constexpr std::size_t kHeight = 0;
  static constexpr std::size_t kOrientation = 1;     // 4
  static constexpr std::size_t kRelLocation = 5;     // 2, planar step in prev local frame
  static constexpr std::size_t kRelOrientation = 7;  // 4, body-frame delta quaternion
  static constexpr std::size_t kLinVel = 11;         // 3
  static constexpr std::size_t kAngVel = 14;         // 3
  static constexpr std::size_t kJointPose = 17;

  std::size_t ee_positions() const { return kJointPose + dof; }
  std::size_t ee_velocities() const { return ee_positions() + 3 * ee_count; }
  std::size_t size() const { return 17 + dof + 6 * ee_count; }

  static CharacterStateLayout of(const Skeleton& skel) {
    return {skel.dof(), skel.end_effectors.size()};
  }
};

struct CharacterState {
  std::vector<double> values;

  void validate(const CharacterStateLayout& layout) const {
    require(values.size() == layout.size(), "CharacterState: length " +
                                                std::to_string(values.size()) +
                                                " does not match layout " +
                                                std::to_string(layout.size()));
    require_finite(values, "CharacterState");
  }
};

namespace detail {

inline void put_vec3(std::vector<double>& v, std::size_t at, const Vec3& p) {
  v[at] = p.x;
  v[at + 1] = p.y;
  v[at + 2] = p.z;
}

inline void put_quat(std::vector<double>& v, std::size_t at, const Quat& q) {
  v[at] = q.w;
  v[at + 1] = q.x;
  v[at + 2] = q.y;
  v[at + 3] = q.z;
}

/// Headings for frames 0..last with carry-forward through degenerate facing
/// (first frame falls back to the global +x direction).
inline std::vector<double> headings_up_to(const Trajectory& traj, std::size_t last) {
  std::vector<double> h(last + 1, 0.0);
  double carried = 0.0;
  for (std::size_t t = 0; t <= last; ++t) {
    heading_of(traj.frames[t].root_orientation, carried);
    h[t] = carried;
  }
  return h;
}

/// World angular velocity by backward difference of root orientations.
inline Vec3 angular_velocity(const Quat& prev, const Quat& cur, double dt) {
  const Quat rel = (cur * prev.conjugate()).normalized();
  return rel.to_rotvec() / dt;
}

}  // namespace detail

/// Human state per the fixed 92-dim layout. Velocities are backward finite
/// differences over dt, expressed in the current frame's local frame.
/// Requires 1 <= t < frame count (frame t-1 supplies the differences).
inline HumanState extract_human_state(const Skeleton& skel, const Trajectory& traj,
                                      std::size_t t) {
  require(skel.joints.size() == HumanStateLayout::kJointCount,
          "extract_human_state: human skeleton must have 17 joints");
  require(skel.end_effectors.size() == HumanStateLayout::kEeCount,
          "extract_human_state: human skeleton must have 5 end-effectors");
  require(t >= 1, "extract_human_state: no previous frame (t = 0)");
  require(t < traj.frames.size(), "extract_human_state: frame index out of range");
  require(traj.dt > 0, "extract_human_state: dt must be positive");

  const Pose& cur = traj.frames[t];
  const Pose& prev = traj.frames[t - 1];
  const auto headings = detail::headings_up_to(traj, t);
  const Transform frame = local_frame_or(cur, headings[t]);
  const Transform inv = frame.inverse();
  const Quat rot_inv = inv.rotation;

  const auto fk_cur = forward_kinematics(skel, cur);
  const auto fk_prev = forward_kinematics(skel, prev);

  HumanState out;
  out.values.assign(HumanStateLayout::kSize, 0.0);
  auto& v = out.values;
  v[HumanStateLayout::kHeight] = cur.root_position.z;
  detail::put_quat(v, HumanStateLayout::kOrientation,
                   (rot_inv * cur.root_orientation).normalized().canonical());
  detail::put_vec3(v, HumanStateLayout::kLinVel,
                   rot_inv.rotate((cur.root_position - prev.root_position) / traj.dt));
  detail::put_vec3(v, HumanStateLayout::kAngVel,
                   rot_inv.rotate(detail::angular_velocity(prev.root_orientation,
                                                           cur.root_orientation, traj.dt)));
  for (std::size_t j = 0; j < skel.joints.size(); ++j)
    detail::put_vec3(v, HumanStateLayout::kJointPositions + 3 * j,
                     inv.apply(fk_cur[j].translation));
  for (std::size_t e = 0; e < skel.end_effectors.size(); ++e) {
    const std::size_t j = skel.end_effectors[e].joint;
    detail::put_vec3(v, HumanStateLayout::kEePositions + 3 * e, inv.apply(fk_cur[j].translation));
    detail::put_vec3(v, HumanStateLayout::kEeVelocities + 3 * e,
                     rot_inv.rotate((fk_cur[j].translation - fk_prev[j].translation) / traj.dt));
  }
  out.validate();
  return out;
}

/// Character state per the 17 + dof + 6*N_ee layout; rel_root_* entries are
/// measured against frame t-1 in its local frame / body frame.
inline CharacterState extract_character_state(const Skeleton& skel, const Trajectory& traj,
                                              std::size_t t) {
  require(t >= 1, "extract_character_state: no previous frame (t = 0)");
  require(t < traj.frames.size(), "extract_character_state: frame index out of range");
  require(traj.dt > 0, "extract_character_state: dt must be positive");

  const CharacterStateLayout layout = CharacterStateLayout::of(skel);
  const Pose& cur = traj.frames[t];
  const Pose& prev = traj.frames[t - 1];
  const auto headings = detail::headings_up_to(traj, t);
  const Transform frame = local_frame_or(cur, headings[t]);
  const Transform inv = frame.inverse();
  const Quat rot_inv = inv.rotation;
  const Quat prev_rot_inv = Quat::yaw(-headings[t - 1]);

  const auto fk_cur = forward_kinematics(skel, cur);
  const auto fk_prev = forward_kinematics(skel, prev);

  CharacterState out;
  out.values.assign(layout.size(), 0.0);
  auto& v = out.values;
  v[CharacterStateLayout::kHeight] = cur.root_position.z;
  detail::put_quat(v, CharacterStateLayout::kOrientation,
                   (rot_inv * cur.root_orientation).normalized().canonical());
  const Vec3 step = prev_rot_inv.rotate(cur.root_position - prev.root_position);
  v[CharacterStateLayout::kRelLocation] = step.x;
  v[CharacterStateLayout::kRelLocation + 1] = step.y;
  detail::put_quat(v, CharacterStateLayout::kRelOrientation,
                   (prev.root_orientation.conjugate() * cur.root_orientation)
                       .normalized()
                       .canonical());
  detail::put_vec3(v, CharacterStateLayout::kLinVel,
                   rot_inv.rotate((cur.root_position - prev.root_position) / traj.dt));
  detail::put_vec3(v, CharacterStateLayout::kAngVel,
                   rot_inv.rotate(detail::angular_velocity(prev.root_orientation,
                                                           cur.root_orientation, traj.dt)));
  for (std::size_t k = 0; k < cur.joint_values.size(); ++k)
    v[CharacterStateLayout::kJointPose + k] = cur.joint_values[k];
  for (std::size_t e = 0; e < skel.end_effectors.size(); ++e) {
    const std::size_t j = skel.end_effectors[e].joint;
    detail::put_vec3(v, layout.ee_positions() + 3 * e, inv.apply(fk_cur[j].translation));
    detail::put_vec3(v, layout.ee_velocities() + 3 * e,
                     rot_inv.rotate((fk_cur[j].translation - fk_prev[j].translation) / traj.dt));
  }
  out.validate(layout);
  return out;
}

/// All states of a trajectory (frames 1..T-1) with O(T) heading carry.
inline std::vector<HumanState> extract_human_states(const Skeleton& skel,
                                                    const Trajectory& traj) {
  require(traj.frames.size() >= 2, "extract_human_states: need at least 2 frames");
  std::vector<HumanState> out;
  out.reserve(traj.frames.size() - 1);
  for (std::size_t t = 1; t < traj.frames.size(); ++t)
    out.push_back(extract_human_state(skel, traj, t));
  return out;
}

inline std::vector<CharacterState> extract_character_states(const Skeleton& skel,
                                                            const Trajectory& traj) {
  require(traj.frames.size() >= 2, "extract_character_states: need at least 2 frames");
  std::vector<CharacterState> out;
  out.reserve(traj.frames.size() - 1);
  for (std::size_t t = 1; t < traj.frames.size(); ++t)
    out.push_back(extract_character_state(skel, traj, t));
  return out;
}

}  // namespace ace
