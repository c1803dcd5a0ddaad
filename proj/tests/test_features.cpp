#include <catch2/catch.hpp>

#include "ace/characters.hpp"
#include "ace/features.hpp"
#include "ace/gait.hpp"
#include "ace/human_motion.hpp"
#include "test_helpers.hpp"

using namespace ace;

namespace {

HumanState synthetic_human_state() {
  HumanState x;
  x.values.assign(HumanStateLayout::kSize, 0.0);
  x.values[HumanStateLayout::kHeight] = 1.7;
  x.values[HumanStateLayout::kOrientation] = 1.0;  // identity quaternion
  return x;
}

}  // namespace

TEST_CASE("feature_fn: normalized root height is definitional") {
  const Skeleton human = human17();  // body_length 1.7
  EEMapping mapping;
  mapping.char_to_human = {2};  // one mapped end-effector
  const FeatureVector f = feature_of_human(synthetic_human_state(), human, mapping);
  CHECK(f.values[FeatureVector::kHeight] == Approx(1.0));
  CHECK(f.values.size() == 14);  // 11 + 3
}

TEST_CASE("feature_fn: invariant under uniform character scaling") {
  Rng rng(21);
  const Skeleton spot = spot_like();
  Skeleton scaled = spot;
  const double factor = 2.0;
  scaled.body_length *= factor;
  for (Joint& j : scaled.joints) j.offset = j.offset * factor;

  Trajectory traj, traj_scaled;
  traj.skeleton_id = spot.name;
  traj_scaled.skeleton_id = scaled.name;
  traj.dt = traj_scaled.dt = 1.0 / 30.0;
  for (int f = 0; f < 3; ++f) {
    Pose p = test::random_pose(spot, rng);
    Pose ps = p;
    ps.root_position = p.root_position * factor;
    // prismatic extensions are lengths and scale with the character
    const auto offsets = joint_value_offsets(spot);
    for (std::size_t j = 0; j < spot.joints.size(); ++j)
      if (spot.joints[j].kind == JointKind::kPrismatic)
        ps.joint_values[offsets[j]] *= factor;
    traj.frames.push_back(std::move(p));
    traj_scaled.frames.push_back(std::move(ps));
  }
  const FeatureVector a =
      feature_of_character(extract_character_state(spot, traj, 1), spot);
  const FeatureVector b =
      feature_of_character(extract_character_state(scaled, traj_scaled, 1), scaled);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(a.values[i] == Approx(b.values[i]).margin(1e-9));
}

TEST_CASE("feature_fn: human features invariant under uniform human scaling") {
  Rng rng(44);
  const Skeleton human = human17();
  Skeleton scaled = human;
  const double factor = 1.7;
  scaled.body_length *= factor;
  for (Joint& j : scaled.joints) j.offset = j.offset * factor;

  Trajectory traj, traj_scaled;
  traj.skeleton_id = human.name;
  traj_scaled.skeleton_id = scaled.name;
  traj.dt = traj_scaled.dt = 1.0 / 30.0;
  for (int f = 0; f < 3; ++f) {
    Pose p = test::random_pose(human, rng);
    p.root_position.z = rng.uniform(0.5, 1.0);
    Pose ps = p;
    ps.root_position = p.root_position * factor;
    traj.frames.push_back(std::move(p));
    traj_scaled.frames.push_back(std::move(ps));
  }
  EEMapping mapping;
  mapping.char_to_human = {0, 3, 4};
  const FeatureVector a =
      feature_of_human(extract_human_state(human, traj, 1), human, mapping);
  const FeatureVector b =
      feature_of_human(extract_human_state(scaled, traj_scaled, 1), scaled, mapping);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(a.values[i] == Approx(b.values[i]).margin(1e-9));
}

TEST_CASE("feature_fn: character feature length covers all end-effectors") {
  const Skeleton stretch = stretch_like();
  Trajectory traj;
  traj.skeleton_id = stretch.name;
  traj.dt = 1.0 / 30.0;
  Rng rng(3);
  for (int f = 0; f < 3; ++f) traj.frames.push_back(test::random_pose(stretch, rng));
  const FeatureVector f = feature_of_character(extract_character_state(stretch, traj, 1), stretch);
  CHECK(f.values.size() == FeatureVector::size_for(1));

  EEMapping bad;
  bad.char_to_human = {9};  // no such human end-effector
  CHECK_THROWS_AS(feature_of_human(synthetic_human_state(), human17(), bad), ValidationError);
}

TEST_CASE("kl: zero for identical gaussians, closed form otherwise") {
  const DiagGaussian3 p{{0.1, -0.4, 0.9}, {0.02, 0.03, 0.04}};
  CHECK(kl_diag_gaussian(p, p) == Approx(0.0).margin(1e-12));

  const DiagGaussian3 q{{0.1, -0.4, 1.1}, {0.02, 0.03, 0.04}};
  // only the z term differs: (mu_p - mu_q)^2 / (2 var_q)
  CHECK(kl_diag_gaussian(p, q) == Approx(0.2 * 0.2 / (2 * 0.04)));
  CHECK(kl_diag_gaussian(p, q) > 0);
}

TEST_CASE("auto-map: identical distributions give the identity mapping") {
  std::vector<DiagGaussian3> ees{{{0.2, 0.1, 0.05}, {0.01, 0.01, 0.01}},
                                 {{-0.2, 0.1, 0.05}, {0.01, 0.02, 0.01}},
                                 {{0.0, 0.3, 0.9}, {0.05, 0.01, 0.04}}};
  std::vector<std::vector<double>> kl;
  const EEMapping m = choose_min_kl_mapping(ees, ees, &kl);
  for (std::size_t j = 0; j < ees.size(); ++j) {
    CHECK(m.char_to_human[j] == j);
    CHECK(kl[j][j] == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("auto-map: high gripper matches the hand, not the foot") {
  const std::vector<DiagGaussian3> character{{{0.3, 0.0, 0.9}, {0.05, 0.05, 0.03}}};
  const std::vector<DiagGaussian3> human{
      {{0.1, 0.1, 0.05}, {0.02, 0.02, 0.001}},  // foot, near the ground
      {{0.25, -0.2, 0.9}, {0.04, 0.05, 0.05}},  // hand, raised
  };
  const EEMapping m = choose_min_kl_mapping(character, human);
  CHECK(m.char_to_human[0] == 1);
}

TEST_CASE("auto-map: chosen mapping attains the exhaustive minimum") {
  Rng rng(64);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DiagGaussian3> character(1 + rng.index(6)), human(1 + rng.index(5));
    auto randomize = [&](DiagGaussian3& g) {
      g.mean = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1.2)};
      g.var = {rng.uniform(1e-3, 0.2), rng.uniform(1e-3, 0.2), rng.uniform(1e-3, 0.2)};
    };
    for (auto& g : character) randomize(g);
    for (auto& g : human) randomize(g);
    const EEMapping m = choose_min_kl_mapping(character, human);
    for (std::size_t j = 0; j < character.size(); ++j) {
      const double chosen = kl_diag_gaussian(character[j], human[m.char_to_human[j]]);
      for (std::size_t i = 0; i < human.size(); ++i)
        CHECK(chosen <= kl_diag_gaussian(character[j], human[i]) + 1e-12);
    }
  }
}

TEST_CASE("auto-map: end-to-end on generated data assigns the gripper to a hand") {
  CommandProfile prof;
  prof.seed = 17;
  const MotionDataset char_ds =
      gen_character_dataset(spot_like(), {trot_gait(), walk_gait()}, prof, 600, 1);
  HumanMotionConfig hc;
  hc.trajectories_per_template = 1;
  hc.frames = 150;
  hc.seed = 23;
  const MotionDataset human_ds = gen_human_dataset(hc);

  const EEMapResult result = auto_map_end_effectors(human_ds, char_ds);
  REQUIRE(result.mapping.char_to_human.size() == 5);
  // spot EEs: 4 feet (fl, fr, hl, hr) then the gripper; human EEs:
  // l_foot, r_foot, l_hand, r_hand, head. Front quadruped feet sit far
  // forward and may legitimately match hands, but sides must be consistent
  // and the gripper must match a hand, never a foot or the head.
  for (std::size_t leg = 0; leg < 4; ++leg) {
    const bool left_leg = leg % 2 == 0;
    const std::size_t target = result.mapping.char_to_human[leg];
    CHECK(target != 4);  // a foot never looks like the head
    CHECK((target % 2 == 0) == left_leg);  // left feet to left targets
  }
  const std::size_t gripper_target = result.mapping.char_to_human[4];
  CHECK((gripper_target == 2 || gripper_target == 3));  // a hand

  // manual override is returned verbatim
  EEMapping manual;
  manual.char_to_human = {0, 1, 0, 1, 2};
  const EEMapResult forced = auto_map_end_effectors(human_ds, char_ds, &manual);
  CHECK(forced.mapping.source == EEMapping::Source::kManual);
  CHECK(forced.mapping.char_to_human == manual.char_to_human);
}

TEST_CASE("auto-map: empty datasets rejected") {
  MotionDataset empty;
  empty.skeleton = human17();
  CommandProfile prof;
  prof.seed = 1;
  const MotionDataset char_ds = gen_character_dataset(stretch_like(), {}, prof, 30, 1);
  CHECK_THROWS_AS(auto_map_end_effectors(empty, char_ds), ValidationError);
}
