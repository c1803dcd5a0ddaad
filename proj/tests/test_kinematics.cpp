#include <catch2/catch.hpp>

#include "ace/characters.hpp"
#include "ace/state.hpp"
#include "test_helpers.hpp"

using namespace ace;

namespace {

Skeleton two_link_arm() {
  Skeleton s;
  s.name = "arm2";
  s.body_length = 2.0;
  s.joints.push_back({"base", -1, {0, 0, 0}, JointKind::kFixed, {0, 0, 1}});
  s.joints.push_back({"elbow", 0, {1, 0, 0}, JointKind::kRevolute1, {0, 0, 1}});
  s.joints.push_back({"tip", 1, {1, 0, 0}, JointKind::kFixed, {0, 0, 1}});
  s.end_effectors.push_back({2, EndEffectorRole::kHand});
  s.validate();
  return s;
}

Trajectory stationary_trajectory(const Skeleton& s, const Pose& pose, std::size_t frames,
                                 double dt = 1.0 / 30.0) {
  Trajectory t;
  t.skeleton_id = s.name;
  t.dt = dt;
  t.frames.assign(frames, pose);
  return t;
}

Pose rest_pose(const Skeleton& s, Vec3 root = {}, Quat q = Quat::identity()) {
  Pose p;
  p.root_position = root;
  p.root_orientation = q;
  p.joint_values.assign(s.dof(), 0.0);
  return p;
}

}  // namespace

TEST_CASE("fk: zero pose accumulates offsets") {
  const Skeleton arm = two_link_arm();
  const auto fk = forward_kinematics(arm, rest_pose(arm));
  CHECK(fk[2].translation.x == Approx(2.0).margin(1e-12));
  CHECK(fk[2].translation.y == Approx(0.0).margin(1e-12));
}

TEST_CASE("fk: first articulated joint rotated 90 degrees") {
  const Skeleton arm = two_link_arm();
  Pose p = rest_pose(arm);
  p.joint_values[0] = std::numbers::pi / 2;
  const auto fk = forward_kinematics(arm, p);
  CHECK(fk[2].translation.x == Approx(1.0).margin(1e-9));
  CHECK(fk[2].translation.y == Approx(1.0).margin(1e-9));
  CHECK(fk[2].translation.z == Approx(0.0).margin(1e-9));
}

TEST_CASE("fk: root transform is the pose root transform") {
  const Skeleton arm = two_link_arm();
  const auto fk = forward_kinematics(arm, rest_pose(arm, {0, 0, 0.5}));
  CHECK(fk[0].translation.x == Approx(0.0).margin(1e-12));
  CHECK(fk[0].translation.z == Approx(0.5).margin(1e-12));
}

TEST_CASE("fk: dimension mismatch rejected") {
  const Skeleton arm = two_link_arm();
  Pose p = rest_pose(arm);
  p.joint_values.push_back(0.0);
  CHECK_THROWS_AS(forward_kinematics(arm, p), ValidationError);
}

TEST_CASE("fk: rigid-transform equivariance on random skeletons") {
  Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const Skeleton s = test::random_skeleton(rng);
    const Pose p = test::random_pose(s, rng);
    const auto fk = forward_kinematics(s, p);

    const Quat rq = Quat{rng.normal(), rng.normal(), rng.normal(), rng.normal()}.normalized();
    const Vec3 rt{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Transform world{rq, rt};

    Pose moved = p;
    moved.root_position = world.apply(p.root_position);
    moved.root_orientation = (rq * p.root_orientation).normalized();
    const auto fk_moved = forward_kinematics(s, moved);
    for (std::size_t j = 0; j < fk.size(); ++j) {
      const Vec3 expect = world.apply(fk[j].translation);
      CHECK((fk_moved[j].translation - expect).norm() < 1e-9);
    }
  }
}

TEST_CASE("local_frame: identity for a character facing +x at the origin") {
  const Skeleton arm = two_link_arm();
  const Transform f = local_frame(rest_pose(arm));
  CHECK(f.translation.norm() == Approx(0.0).margin(1e-12));
  CHECK(f.rotation.w == Approx(1.0).margin(1e-12));
}

TEST_CASE("local_frame: degenerate facing throws") {
  const Skeleton arm = two_link_arm();
  // pitch the root so its +x axis points straight up
  const Pose p = rest_pose(arm, {0, 0, 1}, Quat::from_axis_angle({0, 1, 0}, -std::numbers::pi / 2));
  CHECK_THROWS_AS(local_frame(p), NumericalError);
  double heading = 0.25;
  local_frame_or(p, 0.25, &heading);  // falls back to the carried heading
  CHECK(heading == Approx(0.25));
}

TEST_CASE("human state: layout length and local-frame basics") {
  const Skeleton human = human17();
  Trajectory traj = stationary_trajectory(human, rest_pose(human, {0, 0, 0.87}), 3);
  const HumanState x = extract_human_state(human, traj, 1);
  REQUIRE(x.values.size() == 92);

  // stationary: every velocity entry zero
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(x.values[HumanStateLayout::kLinVel + i] == Approx(0.0).margin(1e-12));
    CHECK(x.values[HumanStateLayout::kAngVel + i] == Approx(0.0).margin(1e-12));
  }
  for (std::size_t i = 0; i < 15; ++i)
    CHECK(x.values[HumanStateLayout::kEeVelocities + i] == Approx(0.0).margin(1e-12));

  CHECK(x.values[HumanStateLayout::kHeight] == Approx(0.87));
  CHECK_THROWS_AS(extract_human_state(human, traj, 0), ValidationError);
}

TEST_CASE("human state: forward translation gives local +x velocity") {
  const Skeleton human = human17();
  const double v = 1.3, dt = 1.0 / 30.0;
  Trajectory traj;
  traj.skeleton_id = human.name;
  traj.dt = dt;
  for (int f = 0; f < 3; ++f)
    traj.frames.push_back(rest_pose(human, {v * dt * f, 0, 0.87}));
  const HumanState x = extract_human_state(human, traj, 1);
  CHECK(x.values[HumanStateLayout::kLinVel] == Approx(v).margin(1e-9));
  CHECK(x.values[HumanStateLayout::kLinVel + 1] == Approx(0.0).margin(1e-9));
  CHECK(x.values[HumanStateLayout::kLinVel + 2] == Approx(0.0).margin(1e-9));
}

TEST_CASE("character state: spot layout is 65 and stationary rel entries are trivial") {
  const Skeleton spot = spot_like();
  REQUIRE(CharacterStateLayout::of(spot).size() == 65);
  Trajectory traj = stationary_trajectory(spot, rest_pose(spot, {0.3, -0.2, 0.48}), 3);
  const CharacterState x = extract_character_state(spot, traj, 1);
  REQUIRE(x.values.size() == 65);
  CHECK(x.values[CharacterStateLayout::kRelLocation] == Approx(0.0).margin(1e-12));
  CHECK(x.values[CharacterStateLayout::kRelLocation + 1] == Approx(0.0).margin(1e-12));
  CHECK(x.values[CharacterStateLayout::kRelOrientation] == Approx(1.0).margin(1e-12));
  for (int i = 1; i < 4; ++i)
    CHECK(x.values[CharacterStateLayout::kRelOrientation + i] == Approx(0.0).margin(1e-12));
}

TEST_CASE("character state: in-place yaw recovers the angular rate") {
  const Skeleton spot = spot_like();
  const double omega = 0.8, dt = 1.0 / 30.0;
  Trajectory traj;
  traj.skeleton_id = spot.name;
  traj.dt = dt;
  for (int f = 0; f < 4; ++f)
    traj.frames.push_back(rest_pose(spot, {0, 0, 0.48}, Quat::yaw(omega * dt * f)));
  const CharacterState x = extract_character_state(spot, traj, 2);
  CHECK(x.values[CharacterStateLayout::kAngVel + 2] == Approx(omega).margin(1e-6));
  CHECK(x.values[CharacterStateLayout::kAngVel] == Approx(0.0).margin(1e-9));
}

TEST_CASE("states: invariant under global yaw and horizontal translation") {
  Rng rng(99);
  const Skeleton human = human17();
  const Skeleton spot = spot_like();

  for (int trial = 0; trial < 10; ++trial) {
    const double yaw = rng.uniform(-3, 3);
    const Vec3 shift{rng.uniform(-5, 5), rng.uniform(-5, 5), 0};
    const Quat rot = Quat::yaw(yaw);

    auto moved = [&](const Trajectory& traj) {
      Trajectory out = traj;
      for (Pose& p : out.frames) {
        p.root_position = rot.rotate(p.root_position) + shift;
        p.root_orientation = (rot * p.root_orientation).normalized();
      }
      return out;
    };

    Trajectory htraj;
    htraj.skeleton_id = human.name;
    htraj.dt = 1.0 / 30.0;
    for (int f = 0; f < 4; ++f) {
      Pose p = test::random_pose(human, rng);
      p.root_position.z = rng.uniform(0.5, 1.2);
      htraj.frames.push_back(std::move(p));
    }
    const auto a = extract_human_state(human, htraj, 2);
    const auto b = extract_human_state(human, moved(htraj), 2);
    for (std::size_t i = 0; i < a.values.size(); ++i)
      CHECK(a.values[i] == Approx(b.values[i]).margin(1e-9));

    Trajectory ctraj;
    ctraj.skeleton_id = spot.name;
    ctraj.dt = 1.0 / 30.0;
    for (int f = 0; f < 4; ++f) ctraj.frames.push_back(test::random_pose(spot, rng));
    const auto ca = extract_character_state(spot, ctraj, 2);
    const auto cb = extract_character_state(spot, moved(ctraj), 2);
    for (std::size_t i = 0; i < ca.values.size(); ++i)
      CHECK(ca.values[i] == Approx(cb.values[i]).margin(1e-9));
  }
}

TEST_CASE("states: layout totals on random skeletons") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Skeleton s = test::random_skeleton(rng, 4 + rng.index(8));
    const CharacterStateLayout layout = CharacterStateLayout::of(s);
    CHECK(layout.size() == 17 + s.dof() + 6 * s.end_effectors.size());

    Trajectory traj;
    traj.skeleton_id = s.name;
    traj.dt = 1.0 / 30.0;
    for (int f = 0; f < 3; ++f) traj.frames.push_back(test::random_pose(s, rng));
    CHECK(extract_character_state(s, traj, 1).values.size() == layout.size());
  }
}

TEST_CASE("states: backward difference matches analytic velocity within 2*dt*|a|") {
  const Skeleton human = human17();
  const double dt = 1.0 / 30.0;
  const Vec3 v0{0.8, -0.2, 0};
  const Vec3 accel{1.5, 0.7, 0};
  Trajectory traj;
  traj.skeleton_id = human.name;
  traj.dt = dt;
  for (int f = 0; f < 10; ++f) {
    const double t = f * dt;
    traj.frames.push_back(
        rest_pose(human, {v0.x * t + 0.5 * accel.x * t * t, v0.y * t + 0.5 * accel.y * t * t, 0.9}));
  }
  for (std::size_t t = 1; t < traj.frames.size(); ++t) {
    const HumanState x = extract_human_state(human, traj, t);
    const double time = static_cast<double>(t) * dt;
    const Vec3 expect = v0 + accel * time;  // facing +x: local == world here
    const Vec3 got{x.values[HumanStateLayout::kLinVel], x.values[HumanStateLayout::kLinVel + 1],
                   x.values[HumanStateLayout::kLinVel + 2]};
    CHECK((got - expect).norm() <= 2.0 * dt * accel.norm());
  }
}

TEST_CASE("local_frame: height preserved in state features") {
  const Skeleton human = human17();
  Trajectory traj = stationary_trajectory(human, rest_pose(human, {3, -1, 0.51}), 2);
  CHECK(extract_human_state(human, traj, 1).values[HumanStateLayout::kHeight] == Approx(0.51));
}

TEST_CASE("skeleton invariants enforced") {
  Skeleton bad = two_link_arm();
  bad.body_length = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  Skeleton bad2 = two_link_arm();
  bad2.end_effectors[0].joint = 1;  // elbow has a child
  CHECK_THROWS_AS(bad2.validate(), ValidationError);

  Skeleton bad3 = two_link_arm();
  bad3.joints[1].parent = 2;  // breaks topological order
  CHECK_THROWS_AS(bad3.validate(), ValidationError);
}
