#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ace/features.hpp"
#include "ace/rng.hpp"
#include "ace/skeleton.hpp"
#include "ace/state.hpp"

namespace ace {

// ---- Frechet distance over Gaussian fits ----

/// Gaussian fit of a feature distribution (mean + covariance).
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  /// Unbiased fit over row samples; covariance symmetrized explicitly.
  static GaussianStats fit(const std::vector<std::vector<double>>& samples) {
    require(samples.size() >= 2, "GaussianStats: need at least 2 samples");
    const std::size_t d = samples.front().size();
    GaussianStats s;
    s.mean = Eigen::VectorXd::Zero(d);
    for (const auto& x : samples) {
      require(x.size() == d, "GaussianStats: inconsistent sample dimensions");
      s.mean += Eigen::Map<const Eigen::VectorXd>(x.data(), d);
    }
    s.mean /= static_cast<double>(samples.size());
    s.cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : samples) {
      const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(x.data(), d) - s.mean;
      s.cov += c * c.transpose();
    }
    s.cov /= static_cast<double>(samples.size() - 1);
    s.cov = 0.5 * (s.cov + s.cov.transpose()).eval();
    return s;
  }

  static GaussianStats fit_features(const std::vector<FeatureVector>& features) {
    std::vector<std::vector<double>> rows;
    rows.reserve(features.size());
    for (const FeatureVector& f : features) rows.push_back(f.values);
    return fit(rows);
  }
};

/// Principal square root of a symmetric PSD matrix via eigendecomposition;
/// eigenvalues below zero are floored to zero.
inline Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m, double sym_tol = 1e-8) {
  require(m.rows() == m.cols(), "matrix_sqrt_psd: matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= sym_tol * scale,
          "matrix_sqrt_psd: matrix asymmetric beyond tolerance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  require(eig.info() == Eigen::Success, "matrix_sqrt_psd: eigendecomposition failed");
  Eigen::VectorXd vals = eig.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) vals[i] = vals[i] > 0 ? std::sqrt(vals[i]) : 0.0;
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with the product
/// term computed through the symmetrized form S_a^{1/2} S_b S_a^{1/2}.
/// A trace residue within 1e-6 of zero snaps to zero, so identical stats
/// give exactly 0.
inline double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  require(a.mean.size() == b.mean.size(), "frechet_distance: dimension mismatch");
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const Eigen::MatrixXd root_a = matrix_sqrt_psd(a.cov);
  const Eigen::MatrixXd inner = root_a * b.cov * root_a;
  double trace_term =
      a.cov.trace() + b.cov.trace() - 2.0 * matrix_sqrt_psd(inner.eval()).trace();
  if (std::abs(trace_term) < 1e-6) trace_term = 0.0;
  if (trace_term < 0.0)
    throw NumericalError("frechet_distance: trace term negative beyond tolerance");
  return mean_term + trace_term;
}

// ---- diversity ----

/// Mean feature distance between two disjoint random subsets of size s_d,
/// drawn from the pooled features of all motions. Deterministic under seed.
inline double diversity(const std::vector<std::vector<FeatureVector>>& motions, std::size_t s_d,
                        std::uint64_t seed) {
  std::vector<const FeatureVector*> pool;
  for (const auto& seq : motions)
    for (const FeatureVector& f : seq) pool.push_back(&f);
  require(s_d >= 1, "diversity: subset size must be >= 1");
  require(pool.size() >= 2 * s_d,
          "diversity: need at least 2*S_d pooled features, have " + std::to_string(pool.size()));
  Rng rng(seed);
  const auto picks = rng.sample_without_replacement(pool.size(), 2 * s_d);
  double sum = 0;
  for (std::size_t i = 0; i < s_d; ++i) sum += pool[picks[i]]->distance(*pool[picks[s_d + i]]);
  return sum / static_cast<double>(s_d);
}

// ---- unrealistic frame ratio ----

struct UfrThresholds {
  double penetration_depth = 0.01;     // meters below ground
  double contact_height_scale = 0.02;  // contact band, x body_length
  double slide_speed = 0.3;            // body lengths per second
  double capsule_radius_scale = 0.05;  // capsule radius, x body_length
};

struct FrameFlags {
  bool self_collision = false;
  bool foot_penetration = false;
  bool foot_sliding = false;

  bool any() const { return self_collision || foot_penetration || foot_sliding; }
};

struct UfrResult {
  double ufr = 0.0;
  std::vector<FrameFlags> flags;
};

namespace detail {

inline double segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.dot(d1), e = d2.dot(d2), f = d2.dot(r);
  auto clamp01 = [](double v) { return std::min(std::max(v, 0.0), 1.0); };
  double s = 0, t = 0;
  if (a <= 1e-18 && e <= 1e-18) {
    // both degenerate to points
  } else if (a <= 1e-18) {
    t = clamp01(f / e);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-18) {
      s = clamp01(-c / a);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-18 ? clamp01((b * f - c * e) / denom) : 0.0;
      t = (b * s + f) / e;
      if (t < 0) {
        t = 0;
        s = clamp01(-c / a);
      } else if (t > 1) {
        t = 1;
        s = clamp01((b - c) / a);
      }
    }
  }
  return ((p1 + d1 * s) - (p2 + d2 * t)).norm();
}

struct BodySegment {
  std::size_t parent_joint;
  std::size_t child_joint;
  std::size_t parent_group;
  std::size_t child_group;
};

struct SegmentGraph {
  std::vector<BodySegment> segments;
  std::vector<std::vector<bool>> group_linked;  // group adjacency incl. self

  /// Directly connected segments (sharing a link group, or with their groups
  /// joined by another segment) are never collision-tested; everything
  /// further apart in the link graph is.
  bool adjacent(const BodySegment& a, const BodySegment& b) const {
    return group_linked[a.parent_group][b.parent_group] ||
           group_linked[a.parent_group][b.child_group] ||
           group_linked[a.child_group][b.parent_group] ||
           group_linked[a.child_group][b.child_group];
  }
};

/// Capsule segments between parent and child joints. Joints connected by a
/// zero-length offset collapse into one link group (the presets stack
/// coincident 1-dof joints), and segments are recorded as edges between
/// groups.
inline SegmentGraph body_segments(const Skeleton& skel) {
  std::vector<std::size_t> group(skel.joints.size(), 0);
  std::size_t group_count = 1;  // group 0 = root
  std::vector<bool> has_length(skel.joints.size(), false);
  for (std::size_t i = 1; i < skel.joints.size(); ++i) {
    has_length[i] =
        skel.joints[i].offset.norm() > 1e-9 || skel.joints[i].kind == JointKind::kPrismatic;
    group[i] = has_length[i] ? group_count++ : group[skel.joints[i].parent];
  }
  SegmentGraph g;
  g.group_linked.assign(group_count, std::vector<bool>(group_count, false));
  for (std::size_t k = 0; k < group_count; ++k) g.group_linked[k][k] = true;
  for (std::size_t i = 1; i < skel.joints.size(); ++i) {
    if (!has_length[i]) continue;
    const std::size_t pg = group[skel.joints[i].parent];
    g.segments.push_back({static_cast<std::size_t>(skel.joints[i].parent), i, pg, group[i]});
    g.group_linked[pg][group[i]] = true;
    g.group_linked[group[i]][pg] = true;
  }
  return g;
}

}  // namespace detail

/// Per-frame realism detectors: capsule self-collision between non-adjacent
/// body segments, foot penetration below the ground plane, and foot sliding
/// (a foot inside the contact band moving horizontally). A frame is flagged
/// when any detector fires; ufr = flagged / total. Skeletons with no foot
/// end-effectors (wheeled characters) skip the foot detectors.
inline UfrResult unrealistic_frame_ratio(const Trajectory& traj, const Skeleton& skel,
                                         const UfrThresholds& th = {}) {
  require(traj.frames.size() >= 2, "unrealistic_frame_ratio: need at least 2 frames");
  traj.validate(skel);
  const auto feet = skel.foot_indices();
  const detail::SegmentGraph graph = detail::body_segments(skel);
  const auto& segments = graph.segments;
  const double radius = th.capsule_radius_scale * skel.body_length;
  const double contact_h = th.contact_height_scale * skel.body_length;
  const double slide_v = th.slide_speed * skel.body_length;

  UfrResult out;
  out.flags.resize(traj.frames.size());
  std::vector<Vec3> prev_foot_pos(feet.size());
  std::size_t flagged = 0;

  for (std::size_t t = 0; t < traj.frames.size(); ++t) {
    const auto fk = forward_kinematics(skel, traj.frames[t]);
    FrameFlags& flags = out.flags[t];

    for (std::size_t i = 0; i < segments.size() && !flags.self_collision; ++i)
      for (std::size_t j = i + 1; j < segments.size(); ++j) {
        if (graph.adjacent(segments[i], segments[j])) continue;
        const double d = detail::segment_distance(
            fk[segments[i].parent_joint].translation, fk[segments[i].child_joint].translation,
            fk[segments[j].parent_joint].translation, fk[segments[j].child_joint].translation);
        if (d < 2.0 * radius) {
          flags.self_collision = true;
          break;
        }
      }

    for (std::size_t f = 0; f < feet.size(); ++f) {
      const Vec3 p = fk[feet[f]].translation;
      if (p.z < -th.penetration_depth) flags.foot_penetration = true;
      if (t > 0 && p.z < contact_h) {
        const Vec3 d = (p - prev_foot_pos[f]) / traj.dt;
        if (std::sqrt(d.x * d.x + d.y * d.y) > slide_v) flags.foot_sliding = true;
      }
      prev_foot_pos[f] = p;
    }
    if (flags.any()) ++flagged;
  }
  out.ufr = static_cast<double>(flagged) / static_cast<double>(traj.frames.size());
  return out;
}

// ---- feature loss metric ----

/// Mean per-frame ||Psi(x^h_t) - Psi(xhat^r_t)|| over paired trajectories
/// (states exist from frame 1, so T-1 pairs for T frames each).
inline double feature_loss_metric(const Skeleton& human_skel, const Trajectory& human_traj,
                                  const Skeleton& char_skel, const Trajectory& char_traj,
                                  const EEMapping& mapping) {
  require(human_traj.frames.size() == char_traj.frames.size(),
          "feature_loss_metric: trajectories must have equal frame counts");
  require(human_traj.frames.size() >= 2, "feature_loss_metric: need at least 2 frames");
  const auto human_states = extract_human_states(human_skel, human_traj);
  const auto char_states = extract_character_states(char_skel, char_traj);
  double sum = 0;
  for (std::size_t i = 0; i < human_states.size(); ++i)
    sum += feature_of_human(human_states[i], human_skel, mapping)
               .distance(feature_of_character(char_states[i], char_skel));
  return sum / static_cast<double>(human_states.size());
}

// ---- aggregate report ----

struct MetricsReport {
  double div = 0;
  double fid = 0;
  std::optional<double> feature_loss;  // needs paired human motions
  double ufr = 0;
  std::vector<FrameFlags> per_frame_flags;
  std::size_t s_d = 64;
  std::uint64_t seed = 0;
  UfrThresholds thresholds;
};

inline nlohmann::ordered_json metrics_report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["div"] = r.div;
  j["fid"] = r.fid;
  if (r.feature_loss)
    j["feature_loss"] = *r.feature_loss;
  else
    j["feature_loss"] = nullptr;
  j["ufr"] = r.ufr;
  nlohmann::ordered_json flags = nlohmann::ordered_json::array();
  for (const FrameFlags& f : r.per_frame_flags)
    flags.push_back({{"self_collision", f.self_collision},
                     {"foot_penetration", f.foot_penetration},
                     {"foot_sliding", f.foot_sliding}});
  j["per_frame_flags"] = std::move(flags);
  j["config"] = {{"s_d", r.s_d},
                 {"seed", r.seed},
                 {"thresholds",
                  {{"penetration_depth", r.thresholds.penetration_depth},
                   {"contact_height_scale", r.thresholds.contact_height_scale},
                   {"slide_speed", r.thresholds.slide_speed},
                   {"capsule_radius_scale", r.thresholds.capsule_radius_scale}}}};
  return j;
}

}  // namespace ace
