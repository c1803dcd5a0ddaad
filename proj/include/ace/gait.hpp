#pragma once
#include <algorithm>
#include <functional>
#include <limits>

#include <numbers>
#include <string>
#include <vector>

#include "ace/dataset.hpp"
#include "ace/rng.hpp"

namespace ace {

/// Random target command sampler: forward speed, yaw rate, and how long each
/// command is held.
struct CommandProfile {
  double v_min = -1.5, v_max = 5.0;       // m/s
  double w_min = -1.0, w_max = 1.0;       // rad/s
  double hold_min = 1.0, hold_max = 3.0;  // seconds
  std::uint64_t seed = 0;

  void validate() const {
    require(v_min <= v_max && w_min <= w_max, "CommandProfile: ranges must be well-ordered");
    require(hold_min > 0 && hold_min <= hold_max, "CommandProfile: hold durations must be > 0");
  }
};

/// Periodic gait description: per-foot phase offsets, stance fraction, and
/// swing apex height.
struct GaitSpec {
  std::string name = "trot";
  double stride_frequency = 1.6;  // Hz
  double duty_factor = 0.55;      // stance fraction of the cycle
  std::vector<double> phase_offsets;
  double swing_height = 0.06;  // meters

  void validate(std::size_t foot_count) const {
    require(duty_factor > 0 && duty_factor < 1, "GaitSpec: duty factor must be in (0,1)");
    require(stride_frequency > 0, "GaitSpec: stride frequency must be positive");
    require(phase_offsets.size() == foot_count,
            "GaitSpec: need one phase offset per foot (" + std::to_string(foot_count) + ")");
    for (double p : phase_offsets)
      require(p >= 0 && p < 1, "GaitSpec: phase offsets must be in [0,1)");
  }
};

/// Foot order follows the skeleton's foot_indices(); the quadruped presets
/// list legs fl, fr, hl, hr. Duty factors stay moderate so the stride
/// frequency needed at top commanded speed remains well-sampled at 30 fps.
inline GaitSpec trot_gait() { return {"trot", 1.8, 0.42, {0.0, 0.5, 0.5, 0.0}, 0.06}; }
inline GaitSpec walk_gait() { return {"walk", 1.2, 0.48, {0.0, 0.5, 0.25, 0.75}, 0.05}; }
inline GaitSpec bound_gait() { return {"bound", 2.2, 0.35, {0.0, 0.05, 0.5, 0.55}, 0.07}; }

/// Hexapod tripod gait (alternating leg triples), foot order fl,fr,ml,mr,hl,hr.
inline GaitSpec tripod_gait() { return {"tripod", 2.0, 0.45, {0.0, 0.5, 0.5, 0.0, 0.0, 0.5}, 0.04}; }

struct DatagenReport {
  std::size_t ik_clamp_events = 0;
};

namespace detail {

/// Lateral spacing between successive leg-row tracks, relative to body length.
inline constexpr double kTrackGapScale = 0.25;

/// One leg: hip_x (roll), hip_y (pitch), knee (pitch), foot; link lengths
/// from the knee/foot offsets. Matches the preset quadruped/hexapod chains.
struct LegChain {
  std::size_t hip_x, hip_y, knee, foot;
  std::size_t q_hip_x, q_hip_y, q_knee;  // joint_values indices
  Vec3 mount;                            // hip_x offset in the root frame
  double l1, l2;
  double knee_sign;   // +1 knee forward (front legs), -1 backward (hind legs)
  double lateral_out; // stance track offset away from the body midline
};

inline std::vector<LegChain> find_leg_chains(const Skeleton& skel) {
  const auto offsets = joint_value_offsets(skel);
  std::vector<LegChain> legs;
  for (std::size_t foot : skel.foot_indices()) {
    const Joint& fj = skel.joints[foot];
    require(fj.kind == JointKind::kFixed, "gait: foot joints must be fixed");
    const std::size_t knee = static_cast<std::size_t>(fj.parent);
    const Joint& kj = skel.joints[knee];
    const std::size_t hip_y = static_cast<std::size_t>(kj.parent);
    const Joint& hyj = skel.joints[hip_y];
    const std::size_t hip_x = static_cast<std::size_t>(hyj.parent);
    const Joint& hxj = skel.joints[hip_x];
    require(kj.kind == JointKind::kRevolute1 && hyj.kind == JointKind::kRevolute1 &&
                hxj.kind == JointKind::kRevolute1,
            "gait: leg chain must be three revolute joints");
    require(hxj.parent == 0, "gait: hip must attach to the root");
    LegChain leg;
    leg.hip_x = hip_x;
    leg.hip_y = hip_y;
    leg.knee = knee;
    leg.foot = foot;
    leg.q_hip_x = offsets[hip_x];
    leg.q_hip_y = offsets[hip_y];
    leg.q_knee = offsets[knee];
    leg.mount = hxj.offset;
    leg.l1 = kj.offset.norm();
    leg.l2 = fj.offset.norm();
    // knees splay away from the body center so fore and hind shanks on the
    // same side cannot meet mid-stride
    leg.knee_sign = hxj.offset.x >= -1e-9 ? 1.0 : -1.0;
    leg.lateral_out = 0.0;
    require(leg.l1 > 0 && leg.l2 > 0, "gait: leg links must have positive length");
    legs.push_back(leg);
  }
  // fast strides overtrack (a hind foot lands beyond the same-side front
  // foot), so successive leg rows walk on progressively wider tracks and
  // crossing feet pass beside each other
  std::vector<double> rows;
  for (const LegChain& leg : legs) {
    bool found = false;
    for (double r : rows) found |= std::abs(r - leg.mount.x) < 1e-6;
    if (!found) rows.push_back(leg.mount.x);
  }
  std::sort(rows.begin(), rows.end(), std::greater<>());
  const double track_gap = kTrackGapScale * skel.body_length;
  for (LegChain& leg : legs) {
    std::size_t rank = 0;
    while (std::abs(rows[rank] - leg.mount.x) >= 1e-6) ++rank;
    const double side = leg.mount.y >= 0 ? 1.0 : -1.0;
    leg.lateral_out = side * track_gap * static_cast<double>(rank);
  }
  return legs;
}

/// Analytic 3-dof leg IK. Target is in the hip frame (origin at the hip_x
/// joint, axes aligned with the root). Returns false when the target had to
/// be clamped to the reachable annulus.
inline bool leg_ik(const LegChain& leg, Vec3 target, double& q1, double& q2, double& q3) {
  bool clamped = false;
  const double reach_max = 0.98 * (leg.l1 + leg.l2);
  const double reach_min = 1.02 * std::abs(leg.l1 - leg.l2) + 1e-6;
  double r = target.norm();
  if (r > reach_max) {
    target = target * (reach_max / r);
    r = reach_max;
    clamped = true;
  } else if (r < reach_min) {
    target = r > 1e-12 ? target * (reach_min / r) : Vec3{0, 0, -reach_min};
    r = reach_min;
    clamped = true;
  }
  // roll so the remaining 2-link problem lies in the hip's x-z plane
  q1 = std::atan2(target.y, -target.z);
  const double planar_x = target.x;
  const double planar_z = -std::sqrt(target.y * target.y + target.z * target.z);
  const double d =
      (r * r - leg.l1 * leg.l1 - leg.l2 * leg.l2) / (2.0 * leg.l1 * leg.l2);
  q3 = leg.knee_sign * std::acos(std::min(1.0, std::max(-1.0, d)));
  // standard 2-link solution measured from straight-down; q3 >= 0 bends the
  // knee forward of the foot
  const double theta = std::atan2(-planar_x, -planar_z);
  q2 = theta - std::atan2(leg.l2 * std::sin(q3), leg.l1 + leg.l2 * std::cos(q3));
  return clamped;
}

inline double smooth5(double t) {
  t = std::min(std::max(t, 0.0), 1.0);
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

/// Horizontal swing progress: zero until the foot is well off the ground and
/// saturated before the descent, so frames below the contact band never move
/// horizontally even when a fast stride is sampled coarsely.
inline double swing_horizontal(double s) { return smooth5((s - 0.15) / 0.53); }

struct ArmJoint {
  std::size_t q_index;
  double center;
  double amplitude;
  double frequency;
  double phase;
};

}  // namespace detail

/// Procedural gait rollout for legged characters: the root integrates
/// smoothed random commands, stance feet stay pinned to the ground, swing
/// feet follow a smoothed cycloidal arc to a velocity-anticipating landing
/// point, and arm joints move on gentle randomized sinusoids. Characters
/// with no feet (wheeled) keep all leg handling disabled and drive the root
/// directly.
inline MotionDataset gen_character_dataset(const Skeleton& skeleton,
                                           const std::vector<GaitSpec>& gaits,
                                           const CommandProfile& profile,
                                           std::size_t frames_per_trajectory,
                                           std::size_t trajectories_per_gait = 1,
                                           double dt = 1.0 / 30.0,
                                           DatagenReport* report = nullptr) {
  skeleton.validate();
  profile.validate();
  require(frames_per_trajectory >= 2, "gen_character_dataset: need at least 2 frames");
  const auto feet = skeleton.foot_indices();
  const bool legged = !feet.empty();
  const auto legs = legged ? detail::find_leg_chains(skeleton) : std::vector<detail::LegChain>{};
  for (const GaitSpec& g : gaits) g.validate(feet.size());
  require(!legged || !gaits.empty(), "gen_character_dataset: legged skeleton needs a gait spec");

  // standing root height that keeps legs comfortably bent; the rollout
  // crouches further with speed to widen the reachable stance sweep
  double reach = 0.0;
  if (legged) {
    reach = legs.front().l1 + legs.front().l2;
    for (const auto& leg : legs) reach = std::min(reach, leg.l1 + leg.l2);
  }
  auto stand_height_at = [&](double speed) {
    if (!legged) return 0.5 * skeleton.body_length;
    return reach * (0.82 - 0.12 * std::min(std::abs(speed), 5.0) / 5.0);
  };

  // stance sweep budget: stay inside the leg's reach and keep same-side feet
  // from converging mid-stride
  double min_sagittal_sep = std::numeric_limits<double>::infinity();
  double sagittal_extent = 0.0;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    for (std::size_t j = i + 1; j < legs.size(); ++j) {
      if (legs[i].mount.y * legs[j].mount.y < -1e-9) continue;  // opposite sides
      const double sep = std::abs(legs[i].mount.x - legs[j].mount.x);
      if (sep > 1e-6) min_sagittal_sep = std::min(min_sagittal_sep, sep);
      sagittal_extent = std::max(sagittal_extent, sep);
    }
  }
  const double track_gap = legs.empty() ? 0.0 : detail::kTrackGapScale * skeleton.body_length;

  // arm joints: every revolute dof not belonging to a leg chain
  std::vector<std::size_t> leg_dofs;
  for (const auto& leg : legs) {
    leg_dofs.push_back(leg.q_hip_x);
    leg_dofs.push_back(leg.q_hip_y);
    leg_dofs.push_back(leg.q_knee);
  }
  struct FreeDof {
    std::size_t q;
    JointKind kind;
    char axis;    // dominant rotation axis: 'x' roll, 'y' pitch, 'z' yaw
    double side;  // sign of the limb's mount y (paired arms bias outward)
  };
  const auto offsets = joint_value_offsets(skeleton);
  std::vector<FreeDof> free_dofs;
  for (std::size_t j = 0; j < skeleton.joints.size(); ++j) {
    const Joint& jt = skeleton.joints[j];
    const std::size_t nd = joint_dof(jt.kind);
    char axis = 'y';
    if (std::abs(jt.axis.z) >= std::abs(jt.axis.x) && std::abs(jt.axis.z) >= std::abs(jt.axis.y))
      axis = 'z';
    else if (std::abs(jt.axis.x) >= std::abs(jt.axis.y))
      axis = 'x';
    std::size_t top = j;
    while (skeleton.joints[top].parent > 0) top = static_cast<std::size_t>(skeleton.joints[top].parent);
    const double mount_y = skeleton.joints[top].offset.y;
    const double side = std::abs(mount_y) < 1e-6 ? 0.0 : (mount_y > 0 ? 1.0 : -1.0);
    for (std::size_t k = 0; k < nd; ++k) {
      const std::size_t q = offsets[j] + k;
      bool is_leg = false;
      for (std::size_t ld : leg_dofs) is_leg |= (ld == q);
      if (!is_leg) free_dofs.push_back({q, jt.kind, axis, side});
    }
  }

  MotionDataset ds;
  ds.skeleton = skeleton;
  Rng master(profile.seed);
  const std::vector<GaitSpec> gait_list = legged ? gaits : std::vector<GaitSpec>{GaitSpec{
                                                       "wheeled", 1.0, 0.5, {}, 0.0}};

  for (const GaitSpec& gait : gait_list) {
    for (std::size_t rep = 0; rep < trajectories_per_gait; ++rep) {
      Rng rng = master.fork();
      Trajectory traj;
      traj.skeleton_id = skeleton.name;
      traj.dt = dt;

      // randomized gentle arm motion, constant per trajectory; pitch joints
      // bias upward so the arm cannot fold into the leg workspace
      std::vector<detail::ArmJoint> arms;
      for (const auto& fd : free_dofs) {
        double center = 0.0, amp = 0.0;
        if (fd.kind == JointKind::kPrismatic) {
          center = rng.uniform(0.03, 0.08);
          amp = rng.uniform(0.2, 0.9) * center;
        } else if (fd.axis == 'y') {
          center = rng.uniform(-0.35, -0.15);
          amp = rng.uniform(0.10, 0.28);
        } else if (fd.axis == 'z') {
          center = fd.side * 0.25;  // paired arms yaw outward, away from each other
          amp = fd.side == 0.0 ? rng.uniform(0.2, 0.6) : rng.uniform(0.15, 0.30);
        } else {
          center = 0.0;
          amp = rng.uniform(0.15, 0.4);
        }
        arms.push_back({fd.q, center, amp, rng.uniform(0.15, 0.6),
                        rng.uniform(0.0, 2.0 * std::numbers::pi)});
      }

      double v_cmd = rng.uniform(profile.v_min, profile.v_max);
      double w_cmd = rng.uniform(profile.w_min, profile.w_max);
      double hold = rng.uniform(profile.hold_min, profile.hold_max);
      double v = v_cmd, w = w_cmd;  // start on-command, no initial ramp
      double x = 0, y = 0, heading = 0, phase = 0;
      const double tau = 0.25;

      struct FootState {
        Vec3 anchor{};  // world ground contact
        Vec3 lift{};
        Vec3 landing{};
        bool swinging = false;
        bool landing_frozen = false;
      };
      std::vector<FootState> foot_state(legs.size());
      for (std::size_t i = 0; i < legs.size(); ++i)
        foot_state[i].anchor = {legs[i].mount.x, legs[i].mount.y + legs[i].lateral_out, 0};

      for (std::size_t f = 0; f < frames_per_trajectory; ++f) {
        const double t = static_cast<double>(f) * dt;
        if (t >= hold) {
          v_cmd = rng.uniform(profile.v_min, profile.v_max);
          w_cmd = rng.uniform(profile.w_min, profile.w_max);
          hold += rng.uniform(profile.hold_min, profile.hold_max);
        }
        const double blend = std::min(1.0, dt / tau);
        v += (v_cmd - v) * blend;
        w += (w_cmd - w) * blend;
        if (f > 0) {
          heading += w * dt;
          x += std::cos(heading) * v * dt;
          y += std::sin(heading) * v * dt;
        }
        const bool moving = std::abs(v) > 0.03 || std::abs(w) > 0.03;
        const double stand = stand_height_at(v);

        Pose pose;
        pose.root_position = {x, y, stand};
        pose.root_orientation = Quat::yaw(heading);
        pose.joint_values.assign(skeleton.dof(), 0.0);
        for (const auto& a : arms)
          pose.joint_values[a.q_index] =
              a.center + a.amplitude * std::sin(2.0 * std::numbers::pi * a.frequency * t + a.phase);

        if (legged) {
          // strides speed up with speed so the pinned foot sweeps at most
          // sweep_budget per stance: with constant duty, freq >= duty*|v|/b
          // at every instant bounds the stance integral of v by b. Using the
          // command target as well keeps the bound through accelerations.
          const double duty = gait.duty_factor;
          const double v_gait = std::max(std::abs(v), std::abs(v_cmd));
          const double w_gait = std::max(std::abs(w), std::abs(w_cmd));
          const double h_allow =
              std::sqrt(std::max(0.01 * reach * reach, 0.96 * 0.96 * reach * reach - stand * stand));
          double sweep_budget = 1.5 * h_allow;
          if (std::isfinite(min_sagittal_sep))
            sweep_budget = std::min(sweep_budget, 0.8 * min_sagittal_sep);
          double freq = std::max(gait.stride_frequency, duty * v_gait / sweep_budget);
          // yaw closes the lateral gap between leg tracks at rate w * extent
          if (sagittal_extent > 0 && track_gap > 0)
            freq = std::max(freq, duty * w_gait * sagittal_extent / (0.5 * track_gap));

          bool any_swing = false;
          for (const auto& fs : foot_state) any_swing |= fs.swinging;
          if (moving || any_swing) phase += freq * dt;

          const Transform root{pose.root_orientation, pose.root_position};
          const double stance_time = duty / freq;
          for (std::size_t i = 0; i < legs.size(); ++i) {
            const detail::LegChain& leg = legs[i];
            FootState& fs = foot_state[i];
            const double raw = phase + gait.phase_offsets[i];
            const double p = raw - std::floor(raw);
            const bool in_stance = p < duty;

            const Vec3 hip_world = root.apply(leg.mount + Vec3{0, leg.lateral_out, 0});
            const double s = in_stance ? 0.0 : (p - duty) / (1.0 - duty);
            Vec3 target;
            if (in_stance || !moving || (!fs.swinging && s > 0.7)) {
              // the last case: resuming motion too late in the cycle to
              // swing gracefully, so hold this foot down until the wrap
              fs.swinging = false;
              target = fs.anchor;
            } else {
              if (!fs.swinging) {
                fs.swinging = true;
                fs.landing_frozen = false;
                fs.lift = fs.anchor;
              }
              // landing point anticipates root motion over the rest of the
              // swing (at the converging speed) plus half the coming stance
              // (at the command target); frozen at mid-swing so the descent
              // to the ground has no horizontal drift
              if (!fs.landing_frozen) {
                const double t_land = (1.0 - s) * (1.0 - duty) / freq;
                const double adv = 0.5 * (v + v_cmd) * t_land + 0.5 * v_cmd * stance_time;
                const double turn = 0.5 * (w + w_cmd) * (t_land + 0.5 * stance_time);
                fs.landing = {hip_world.x + std::cos(heading + 0.5 * turn) * adv,
                              hip_world.y + std::sin(heading + 0.5 * turn) * adv, 0};
                if (s >= 0.5) fs.landing_frozen = true;
              }
              const double u = detail::swing_horizontal(s);
              target = {fs.lift.x + (fs.landing.x - fs.lift.x) * u,
                        fs.lift.y + (fs.landing.y - fs.lift.y) * u,
                        gait.swing_height * std::sin(std::numbers::pi * s)};
              fs.anchor = {target.x, target.y, 0};
            }

            const Vec3 local = root.inverse().apply(target) - leg.mount;
            double q1, q2, q3;
            if (detail::leg_ik(leg, local, q1, q2, q3) && report) ++report->ik_clamp_events;
            pose.joint_values[leg.q_hip_x] = q1;
            pose.joint_values[leg.q_hip_y] = q2;
            pose.joint_values[leg.q_knee] = q3;
          }
        }
        traj.frames.push_back(std::move(pose));
      }
      ds.trajectories.push_back(std::move(traj));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace ace
