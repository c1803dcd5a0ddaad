#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "ace/characters.hpp"
#include "ace/dataset.hpp"
#include "ace/rng.hpp"

namespace ace {

/// Parametric source-motion templates on the reference 17-joint human,
/// standing in for mocap at desk scale.
struct HumanMotionConfig {
  std::vector<std::string> templates{"walk", "wave", "reach", "push"};
  std::size_t trajectories_per_template = 3;
  std::size_t frames = 240;
  double dt = 1.0 / 30.0;
  std::uint64_t seed = 0;
};

namespace detail {

struct HumanRig {
  Skeleton skeleton;
  std::size_t spine, chest, l_hip, l_knee, r_hip, r_knee;
  std::size_t l_shoulder, l_elbow, r_shoulder, r_elbow;

  static HumanRig make() {
    HumanRig r{human17(), 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    const auto offsets = joint_value_offsets(r.skeleton);
    auto find = [&](const std::string& name) {
      for (std::size_t i = 0; i < r.skeleton.joints.size(); ++i)
        if (r.skeleton.joints[i].name == name) return offsets[i];
      throw ValidationError("human rig: missing joint " + name);
    };
    r.spine = find("spine");
    r.chest = find("chest");
    r.l_hip = find("l_hip");
    r.l_knee = find("l_knee");
    r.r_hip = find("r_hip");
    r.r_knee = find("r_knee");
    r.l_shoulder = find("l_shoulder");
    r.l_elbow = find("l_elbow");
    r.r_shoulder = find("r_shoulder");
    r.r_elbow = find("r_elbow");
    return r;
  }
};

inline void set_rotvec(Pose& pose, std::size_t at, double x, double y, double z) {
  pose.joint_values[at] = x;
  pose.joint_values[at + 1] = y;
  pose.joint_values[at + 2] = z;
}

}  // namespace detail

/// Deterministic synthetic human motions. Walk integrates a sampled speed
/// and slow turn; wave lifts the right arm above the shoulder and oscillates
/// it; reach sweeps the right arm forward and up; push leans the torso and
/// drives both arms in phase while drifting forward.
inline MotionDataset gen_human_dataset(const HumanMotionConfig& cfg) {
  require(cfg.frames >= 2, "gen_human_dataset: need at least 2 frames");
  require(cfg.dt > 0, "gen_human_dataset: dt must be positive");
  const detail::HumanRig rig = detail::HumanRig::make();
  constexpr double kTau = 2.0 * std::numbers::pi;

  MotionDataset ds;
  ds.skeleton = rig.skeleton;
  Rng master(cfg.seed);

  for (const std::string& name : cfg.templates) {
    for (std::size_t rep = 0; rep < cfg.trajectories_per_template; ++rep) {
      Rng rng = master.fork();
      Trajectory traj;
      traj.skeleton_id = rig.skeleton.name;
      traj.dt = cfg.dt;

      const double base_heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
      double x = rng.uniform(-0.5, 0.5), y = rng.uniform(-0.5, 0.5), heading = base_heading;

      // stance width varies per trajectory and the standing templates march
      // in place; without this spread the foot position distributions
      // degenerate and the correspondence KL becomes meaningless
      const double sway_freq = rng.uniform(0.3, 0.6);
      const double sway_amp = rng.uniform(0.10, 0.18);
      const double stance_width = rng.uniform(0.02, 0.30);
      auto weight_shift = [&](Pose& p, double t) {
        const double sway = std::sin(kTau * sway_freq * t);
        const double lift = std::max(0.0, std::sin(kTau * sway_freq * t + 1.1));
        const double lift_r = std::max(0.0, -std::sin(kTau * sway_freq * t + 1.1));
        detail::set_rotvec(p, rig.l_hip, stance_width + sway_amp * sway,
                           0.5 * sway_amp * sway, 0);
        detail::set_rotvec(p, rig.r_hip, -stance_width + sway_amp * sway,
                           -0.5 * sway_amp * sway, 0);
        detail::set_rotvec(p, rig.l_knee, 0, 2.4 * sway_amp * lift, 0);
        detail::set_rotvec(p, rig.r_knee, 0, 2.4 * sway_amp * lift_r, 0);
      };

      if (name == "walk") {
        const double v = rng.uniform(0.5, 2.2);
        const double turn = rng.uniform(-0.25, 0.25);
        const double freq = 0.8 + 0.5 * v;
        const double hip_amp = 0.34 + 0.18 * v;
        const double hip_roll = rng.uniform(0.05, 0.14);
        const double arm_amp = 0.20 + 0.10 * v;
        for (std::size_t f = 0; f < cfg.frames; ++f) {
          const double t = static_cast<double>(f) * cfg.dt;
          const double phi = kTau * freq * t;
          if (f > 0) {
            heading += turn * cfg.dt;
            x += std::cos(heading) * v * cfg.dt;
            y += std::sin(heading) * v * cfg.dt;
          }
          Pose p;
          p.root_position = {x, y, kHuman17StandingHeight + 0.018 * std::sin(2.0 * phi)};
          p.root_orientation = Quat::yaw(heading);
          p.joint_values.assign(rig.skeleton.dof(), 0.0);
          detail::set_rotvec(p, rig.l_hip, stance_width * 0.6 + hip_roll * std::sin(phi + 0.5),
                             -hip_amp * std::sin(phi), 0);
          detail::set_rotvec(p, rig.r_hip, -stance_width * 0.6 - hip_roll * std::sin(phi + 0.5),
                             -hip_amp * std::sin(phi + std::numbers::pi), 0);
          detail::set_rotvec(p, rig.l_knee, 0, 0.5 * std::max(0.0, std::sin(phi + 2.2)), 0);
          detail::set_rotvec(p, rig.r_knee, 0,
                             0.5 * std::max(0.0, std::sin(phi + 2.2 + std::numbers::pi)), 0);
          detail::set_rotvec(p, rig.l_shoulder, 0, arm_amp * std::sin(phi + std::numbers::pi), 0);
          detail::set_rotvec(p, rig.r_shoulder, 0, arm_amp * std::sin(phi), 0);
          detail::set_rotvec(p, rig.l_elbow, 0, -0.25 - 0.1 * std::sin(phi + std::numbers::pi), 0);
          detail::set_rotvec(p, rig.r_elbow, 0, -0.25 - 0.1 * std::sin(phi), 0);
          detail::set_rotvec(p, rig.spine, 0, 0.04 * std::sin(2.0 * phi), 0);
          traj.frames.push_back(std::move(p));
        }
      } else if (name == "wave") {
        const double freq = rng.uniform(0.8, 1.5);
        const bool right = rng.uniform() < 0.5;  // alternate waving arms
        const double lift = (right ? -1.0 : 1.0) * rng.uniform(2.0, 2.4);  // up and outward
        const std::size_t shoulder = right ? rig.r_shoulder : rig.l_shoulder;
        const std::size_t elbow = right ? rig.r_elbow : rig.l_elbow;
        for (std::size_t f = 0; f < cfg.frames; ++f) {
          const double t = static_cast<double>(f) * cfg.dt;
          Pose p;
          p.root_position = {x, y, kHuman17StandingHeight - 0.01 * std::sin(kTau * sway_freq * t)};
          p.root_orientation = Quat::yaw(heading);
          p.joint_values.assign(rig.skeleton.dof(), 0.0);
          weight_shift(p, t);
          detail::set_rotvec(p, shoulder, lift + 0.12 * std::sin(kTau * freq * t), 0, 0);
          detail::set_rotvec(p, elbow, 0.55 * std::sin(kTau * freq * t), -0.35, 0);
          detail::set_rotvec(p, rig.chest, 0.05 * std::sin(kTau * freq * t), 0, 0);
          traj.frames.push_back(std::move(p));
        }
      } else if (name == "reach") {
        const double period = rng.uniform(3.0, 5.0);
        const double depth = rng.uniform(1.5, 1.9);
        const double lunge = rng.uniform(0.35, 0.6);
        const bool right = rng.uniform() < 0.5;
        const std::size_t shoulder = right ? rig.r_shoulder : rig.l_shoulder;
        const std::size_t elbow = right ? rig.r_elbow : rig.l_elbow;
        const std::size_t front_hip = right ? rig.r_hip : rig.l_hip;
        const std::size_t back_knee = right ? rig.l_knee : rig.r_knee;
        for (std::size_t f = 0; f < cfg.frames; ++f) {
          const double t = static_cast<double>(f) * cfg.dt;
          const double cycle = 0.5 - 0.5 * std::cos(kTau * t / period);
          Pose p;
          p.root_position = {x, y, kHuman17StandingHeight - 0.06 * cycle};
          p.root_orientation = Quat::yaw(heading);
          p.joint_values.assign(rig.skeleton.dof(), 0.0);
          weight_shift(p, t);
          detail::set_rotvec(p, shoulder, 0, -0.2 - depth * cycle, 0);
          detail::set_rotvec(p, elbow, 0, -0.5 + 0.45 * cycle, 0);
          detail::set_rotvec(p, rig.spine, 0, 0.12 * cycle, 0);
          // step into the reach
          detail::set_rotvec(p, front_hip, 0, -lunge * cycle, 0);
          detail::set_rotvec(p, back_knee, 0, 0.5 * lunge * cycle, 0);
          traj.frames.push_back(std::move(p));
        }
      } else if (name == "push") {
        const double freq = rng.uniform(0.5, 0.9);
        const double v = rng.uniform(0.15, 0.35);
        const double step_amp = rng.uniform(0.15, 0.28);
        for (std::size_t f = 0; f < cfg.frames; ++f) {
          const double t = static_cast<double>(f) * cfg.dt;
          const double osc = std::sin(kTau * freq * t);
          const double phi = kTau * (0.6 + v) * t;
          if (f > 0) {
            x += std::cos(heading) * v * cfg.dt;
            y += std::sin(heading) * v * cfg.dt;
          }
          Pose p;
          p.root_position = {x, y, kHuman17StandingHeight - 0.02};
          p.root_orientation = Quat::yaw(heading);
          p.joint_values.assign(rig.skeleton.dof(), 0.0);
          // shuffling steps while pushing forward
          detail::set_rotvec(p, rig.l_hip, stance_width * 0.5 + 0.05 * std::sin(phi),
                             -step_amp * std::sin(phi), 0);
          detail::set_rotvec(p, rig.r_hip, -stance_width * 0.5 - 0.05 * std::sin(phi),
                             -step_amp * std::sin(phi + std::numbers::pi), 0);
          detail::set_rotvec(p, rig.l_knee, 0, 0.3 * std::max(0.0, std::sin(phi + 2.2)), 0);
          detail::set_rotvec(p, rig.r_knee, 0,
                             0.3 * std::max(0.0, std::sin(phi + 2.2 + std::numbers::pi)), 0);
          detail::set_rotvec(p, rig.l_shoulder, 0, -1.5 + 0.1 * osc, 0);
          detail::set_rotvec(p, rig.r_shoulder, 0, -1.5 + 0.1 * osc, 0);
          detail::set_rotvec(p, rig.l_elbow, 0, -0.8 + 0.45 * osc, 0);
          detail::set_rotvec(p, rig.r_elbow, 0, -0.8 + 0.45 * osc, 0);
          detail::set_rotvec(p, rig.spine, 0, 0.12 + 0.05 * osc, 0);
          traj.frames.push_back(std::move(p));
        }
      } else {
        throw ValidationError("gen_human_dataset: unknown template '" + name + "'");
      }
      ds.trajectories.push_back(std::move(traj));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace ace
