#pragma once

#include <vector>

#include "ace/state.hpp"

namespace ace {

/// Motion dataset for one character: trajectories sharing a skeleton.
struct MotionDataset {
  Skeleton skeleton;
  std::vector<Trajectory> trajectories;

  void validate() const {
    skeleton.validate();
    for (const Trajectory& t : trajectories) t.validate(skeleton);
  }

  std::size_t frame_count() const {
    std::size_t n = 0;
    for (const Trajectory& t : trajectories) n += t.frames.size();
    return n;
  }
};

/// Consecutive state transition pairs (x_{t-1}, x_t) pooled over the dataset.
struct TransitionSet {
  std::vector<CharacterState> prev;
  std::vector<CharacterState> cur;

  std::size_t size() const { return cur.size(); }
};

/// Derives transitions from every trajectory with >= 3 frames (states exist
/// for t >= 1, so a transition pair needs frames t-1, t and their
/// predecessors for velocities).
inline TransitionSet character_transitions(const MotionDataset& ds) {
  TransitionSet out;
  for (const Trajectory& traj : ds.trajectories) {
    if (traj.frames.size() < 3) continue;
    const auto states = extract_character_states(ds.skeleton, traj);
    for (std::size_t i = 1; i < states.size(); ++i) {
      out.prev.push_back(states[i - 1]);
      out.cur.push_back(states[i]);
    }
  }
  require(out.size() >= 1, "character_transitions: dataset yields no transitions");
  return out;
}

inline std::vector<HumanState> pooled_human_states(const MotionDataset& ds) {
  std::vector<HumanState> out;
  for (const Trajectory& traj : ds.trajectories) {
    if (traj.frames.size() < 2) continue;
    auto states = extract_human_states(ds.skeleton, traj);
    out.insert(out.end(), std::make_move_iterator(states.begin()),
               std::make_move_iterator(states.end()));
  }
  require(!out.empty(), "pooled_human_states: dataset yields no states");
  return out;
}

inline std::vector<CharacterState> pooled_character_states(const MotionDataset& ds) {
  std::vector<CharacterState> out;
  for (const Trajectory& traj : ds.trajectories) {
    if (traj.frames.size() < 2) continue;
    auto states = extract_character_states(ds.skeleton, traj);
    out.insert(out.end(), std::make_move_iterator(states.begin()),
               std::make_move_iterator(states.end()));
  }
  require(!out.empty(), "pooled_character_states: dataset yields no states");
  return out;
}

/// Mean dataset state turned into a standing seed state: velocities and
/// relative-step entries zeroed, quaternion blocks renormalized.
inline CharacterState mean_standing_state(const std::vector<CharacterState>& states,
                                          const CharacterStateLayout& layout) {
  require(!states.empty(), "mean_standing_state: no states");
  CharacterState out;
  out.values.assign(layout.size(), 0.0);
  for (const CharacterState& x : states) {
    require(x.values.size() == layout.size(), "mean_standing_state: dimension mismatch");
    for (std::size_t i = 0; i < layout.size(); ++i) out.values[i] += x.values[i];
  }
  for (double& v : out.values) v /= static_cast<double>(states.size());
  auto renorm = [&](std::size_t at) {
    Quat q{out.values[at], out.values[at + 1], out.values[at + 2], out.values[at + 3]};
    q = q.normalized().canonical();
    out.values[at] = q.w;
    out.values[at + 1] = q.x;
    out.values[at + 2] = q.y;
    out.values[at + 3] = q.z;
  };
  renorm(CharacterStateLayout::kOrientation);
  out.values[CharacterStateLayout::kRelLocation] = 0.0;
  out.values[CharacterStateLayout::kRelLocation + 1] = 0.0;
  out.values[CharacterStateLayout::kRelOrientation] = 1.0;
  out.values[CharacterStateLayout::kRelOrientation + 1] = 0.0;
  out.values[CharacterStateLayout::kRelOrientation + 2] = 0.0;
  out.values[CharacterStateLayout::kRelOrientation + 3] = 0.0;
  for (std::size_t i = 0; i < 6; ++i) out.values[CharacterStateLayout::kLinVel + i] = 0.0;
  for (std::size_t i = 0; i < 3 * layout.ee_count; ++i)
    out.values[layout.ee_velocities() + i] = 0.0;
  out.validate(layout);
  return out;
}

/// Per-dimension z-score statistics, applied at model boundaries. The std is
/// floored so constant dimensions stay well-defined.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std_dev;

  static constexpr double kStdFloor = 1e-6;

  template <typename StateRange>
  static NormStats fit(const StateRange& states) {
    require(!states.empty(), "NormStats: no states");
    const std::size_t dim = states.front().values.size();
    NormStats s;
    s.mean.assign(dim, 0.0);
    s.std_dev.assign(dim, 0.0);
    for (const auto& x : states) {
      require(x.values.size() == dim, "NormStats: inconsistent state dimensions");
      for (std::size_t i = 0; i < dim; ++i) s.mean[i] += x.values[i];
    }
    for (double& m : s.mean) m /= static_cast<double>(states.size());
    for (const auto& x : states)
      for (std::size_t i = 0; i < dim; ++i) {
        const double d = x.values[i] - s.mean[i];
        s.std_dev[i] += d * d;
      }
    for (double& v : s.std_dev)
      v = std::max(std::sqrt(v / static_cast<double>(states.size())), kStdFloor);
    return s;
  }

  std::vector<double> normalize(std::span<const double> x) const {
    require(x.size() == mean.size(), "NormStats: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / std_dev[i];
    return out;
  }

  std::vector<double> denormalize(std::span<const double> x) const {
    require(x.size() == mean.size(), "NormStats: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * std_dev[i] + mean[i];
    return out;
  }
};

}  // namespace ace
