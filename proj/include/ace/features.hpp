#pragma once

#include <vector>

#include "ace/dataset.hpp"
#include "ace/state.hpp"

namespace ace {

/// Feature vector compared across species by the feature loss: root height,
/// root orientation, root velocities, and mapped end-effector positions.
/// Height, linear velocity, and positions are normalized by the species' own
/// body length, so the layout is directly comparable between human and
/// character.
struct FeatureVector {
  std::vector<double> values;

  static constexpr std::size_t kHeight = 0;
  static constexpr std::size_t kOrientation = 1;  // 4
  static constexpr std::size_t kLinVel = 5;       // 3
  static constexpr std::size_t kAngVel = 8;       // 3
  static constexpr std::size_t kEe = 11;          // 3 per mapped end-effector

  static std::size_t size_for(std::size_t mapped_ee) { return 11 + 3 * mapped_ee; }

  double distance(const FeatureVector& o) const {
    require(values.size() == o.values.size(), "FeatureVector: dimension mismatch");
    double s = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - o.values[i];
      s += d * d;
    }
    return std::sqrt(s);
  }
};

/// Correspondence from each character end-effector to one human end-effector
/// (human end-effectors may be reused).
struct EEMapping {
  enum class Source { kAuto, kManual };
  std::vector<std::size_t> char_to_human;
  Source source = Source::kAuto;

  void validate(std::size_t char_ee_count, std::size_t human_ee_count) const {
    require(char_to_human.size() == char_ee_count,
            "EEMapping: must map every character end-effector exactly once");
    for (std::size_t h : char_to_human)
      require(h < human_ee_count, "EEMapping: human end-effector index out of range");
  }
};

/// Rows of a character state that form its feature vector, with the per-row
/// normalization scale. Linear in the state, which is what lets the feature
/// loss ride the tape as a gather + scale.
struct FeatureIndexMap {
  std::vector<std::size_t> rows;
  std::vector<double> scales;
};

inline FeatureIndexMap character_feature_map(const Skeleton& skel) {
  const CharacterStateLayout layout = CharacterStateLayout::of(skel);
  const double inv_len = 1.0 / skel.body_length;
  FeatureIndexMap m;
  auto put = [&](std::size_t row, double scale) {
    m.rows.push_back(row);
    m.scales.push_back(scale);
  };
  put(CharacterStateLayout::kHeight, inv_len);
  for (std::size_t i = 0; i < 4; ++i) put(CharacterStateLayout::kOrientation + i, 1.0);
  for (std::size_t i = 0; i < 3; ++i) put(CharacterStateLayout::kLinVel + i, inv_len);
  for (std::size_t i = 0; i < 3; ++i) put(CharacterStateLayout::kAngVel + i, 1.0);
  for (std::size_t e = 0; e < layout.ee_count; ++e)
    for (std::size_t i = 0; i < 3; ++i) put(layout.ee_positions() + 3 * e + i, inv_len);
  return m;
}

/// Feature vector of a character state (all of its end-effectors, in order).
inline FeatureVector feature_of_character(const CharacterState& x, const Skeleton& skel) {
  const FeatureIndexMap m = character_feature_map(skel);
  x.validate(CharacterStateLayout::of(skel));
  FeatureVector out;
  out.values.resize(m.rows.size());
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    out.values[i] = x.values[m.rows[i]] * m.scales[i];
  return out;
}

/// Feature vector of a human state under a mapping: the end-effector block
/// holds the mapped human end-effectors in character end-effector order, so
/// both species' features share one layout.
inline FeatureVector feature_of_human(const HumanState& x, const Skeleton& human_skel,
                                      const EEMapping& mapping) {
  x.validate();
  mapping.validate(mapping.char_to_human.size(), HumanStateLayout::kEeCount);
  const double inv_len = 1.0 / human_skel.body_length;
  FeatureVector out;
  out.values.reserve(FeatureVector::size_for(mapping.char_to_human.size()));
  out.values.push_back(x.values[HumanStateLayout::kHeight] * inv_len);
  for (std::size_t i = 0; i < 4; ++i)
    out.values.push_back(x.values[HumanStateLayout::kOrientation + i]);
  for (std::size_t i = 0; i < 3; ++i)
    out.values.push_back(x.values[HumanStateLayout::kLinVel + i] * inv_len);
  for (std::size_t i = 0; i < 3; ++i)
    out.values.push_back(x.values[HumanStateLayout::kAngVel + i]);
  for (std::size_t human_ee : mapping.char_to_human)
    for (std::size_t i = 0; i < 3; ++i)
      out.values.push_back(x.values[HumanStateLayout::kEePositions + 3 * human_ee + i] * inv_len);
  return out;
}

// ---- automatic end-effector correspondence ----

/// Diagonal Gaussian over body-length-normalized local end-effector positions.
struct DiagGaussian3 {
  Vec3 mean{};
  Vec3 var{1, 1, 1};

  static constexpr double kVarFloor = 1e-8;
};

/// KL divergence between diagonal Gaussians, KL(p || q), closed form.
inline double kl_diag_gaussian(const DiagGaussian3& p, const DiagGaussian3& q) {
  auto term = [](double mp, double vp, double mq, double vq) {
    return 0.5 * std::log(vq / vp) + (vp + (mp - mq) * (mp - mq)) / (2.0 * vq) - 0.5;
  };
  return term(p.mean.x, p.var.x, q.mean.x, q.var.x) +
         term(p.mean.y, p.var.y, q.mean.y, q.var.y) +
         term(p.mean.z, p.var.z, q.mean.z, q.var.z);
}

namespace detail {

template <typename States>
inline std::vector<DiagGaussian3> fit_ee_gaussians(const States& states, std::size_t ee_count,
                                                   std::size_t ee_offset, double body_length) {
  std::vector<DiagGaussian3> out(ee_count);
  const double inv_len = 1.0 / body_length;
  for (std::size_t e = 0; e < ee_count; ++e) {
    Vec3 mean{}, var{};
    for (const auto& x : states) {
      const Vec3 p{x.values[ee_offset + 3 * e] * inv_len, x.values[ee_offset + 3 * e + 1] * inv_len,
                   x.values[ee_offset + 3 * e + 2] * inv_len};
      mean += p;
    }
    mean = mean / static_cast<double>(states.size());
    for (const auto& x : states) {
      const Vec3 p{x.values[ee_offset + 3 * e] * inv_len, x.values[ee_offset + 3 * e + 1] * inv_len,
                   x.values[ee_offset + 3 * e + 2] * inv_len};
      const Vec3 d = p - mean;
      var += {d.x * d.x, d.y * d.y, d.z * d.z};
    }
    var = var / static_cast<double>(states.size());
    out[e] = {mean,
              {std::max(var.x, DiagGaussian3::kVarFloor), std::max(var.y, DiagGaussian3::kVarFloor),
               std::max(var.z, DiagGaussian3::kVarFloor)}};
  }
  return out;
}

}  // namespace detail

struct EEMapResult {
  EEMapping mapping;
  // kl[j][i] = KL(character EE j || human EE i)
  std::vector<std::vector<double>> kl;
  std::vector<DiagGaussian3> character_gaussians;
  std::vector<DiagGaussian3> human_gaussians;
};

/// Minimum-KL assignment over fitted end-effector Gaussians; ties break to
/// the lowest human index.
inline EEMapping choose_min_kl_mapping(const std::vector<DiagGaussian3>& character,
                                       const std::vector<DiagGaussian3>& human,
                                       std::vector<std::vector<double>>* kl_out = nullptr) {
  require(!character.empty() && !human.empty(), "choose_min_kl_mapping: empty gaussian sets");
  EEMapping mapping;
  mapping.source = EEMapping::Source::kAuto;
  std::vector<std::vector<double>> kl(character.size(), std::vector<double>(human.size(), 0.0));
  for (std::size_t j = 0; j < character.size(); ++j) {
    for (std::size_t i = 0; i < human.size(); ++i) kl[j][i] = kl_diag_gaussian(character[j], human[i]);
    std::size_t best = 0;
    for (std::size_t i = 1; i < human.size(); ++i)
      if (kl[j][i] < kl[j][best]) best = i;
    mapping.char_to_human.push_back(best);
  }
  if (kl_out) *kl_out = std::move(kl);
  return mapping;
}

/// Automatic correspondence: for each character end-effector pick the human
/// end-effector whose position distribution it diverges least from
/// (KL(character || human)); ties break to the lowest human index. A manual
/// override, when given, is validated and returned verbatim.
inline EEMapResult auto_map_end_effectors(const MotionDataset& human_ds,
                                          const MotionDataset& char_ds,
                                          const EEMapping* manual_override = nullptr) {
  require(!human_ds.trajectories.empty(), "auto_map_end_effectors: empty human dataset");
  require(!char_ds.trajectories.empty(), "auto_map_end_effectors: empty character dataset");
  const std::size_t human_ees = human_ds.skeleton.end_effectors.size();
  const std::size_t char_ees = char_ds.skeleton.end_effectors.size();
  require(human_ees >= 1 && char_ees >= 1, "auto_map_end_effectors: both species need >= 1 EE");

  const auto human_states = pooled_human_states(human_ds);
  const auto char_states = pooled_character_states(char_ds);
  const CharacterStateLayout layout = CharacterStateLayout::of(char_ds.skeleton);

  EEMapResult result;
  result.human_gaussians = detail::fit_ee_gaussians(human_states, human_ees,
                                                    HumanStateLayout::kEePositions,
                                                    human_ds.skeleton.body_length);
  result.character_gaussians = detail::fit_ee_gaussians(char_states, char_ees,
                                                        layout.ee_positions(),
                                                        char_ds.skeleton.body_length);

  result.mapping =
      choose_min_kl_mapping(result.character_gaussians, result.human_gaussians, &result.kl);

  if (manual_override) {
    manual_override->validate(char_ees, human_ees);
    result.mapping = *manual_override;
    result.mapping.source = EEMapping::Source::kManual;
  }
  return result;
}

}  // namespace ace
