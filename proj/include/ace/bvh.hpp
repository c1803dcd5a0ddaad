#pragma once

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "ace/skeleton.hpp"

namespace ace {

/// Minimal BVH importer: HIERARCHY with OFFSET/CHANNELS (position channels on
/// the root, up to three rotation channels per joint, any X/Y/Z order), End
/// Sites as fixed leaf joints, MOTION rows matched against the header frame
/// count. Parse errors carry the offending line number.
struct BvhResult {
  Skeleton skeleton;
  Trajectory trajectory;
};

namespace bvh_detail {

struct Channel {
  std::size_t joint;
  char axis;      // 'X' 'Y' 'Z'
  bool rotation;  // else position (root only)
};

struct ParseState {
  std::vector<std::string> lines;
  std::size_t line = 0;     // cursor
  std::size_t current = 0;  // line of the most recently consumed tokens

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("bvh: line " + std::to_string(current + 1) + ": " + what);
  }

  bool done() const { return line >= lines.size(); }

  std::vector<std::string> peek() {
    while (!done()) {
      std::istringstream ss(lines[line]);
      std::vector<std::string> out;
      std::string tok;
      while (ss >> tok) out.push_back(tok);
      if (!out.empty()) return out;
      ++line;
    }
    return {};
  }

  std::vector<std::string> take() {
    auto out = peek();
    if (out.empty()) {
      current = line;
      fail("unexpected end of file");
    }
    current = line;
    ++line;
    return out;
  }
};

inline double parse_number(const std::string& s, ParseState& ps) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) ps.fail("malformed number '" + s + "'");
    return v;
  } catch (const std::exception&) {
    ps.fail("malformed number '" + s + "'");
  }
}

inline Quat rotation_of(char axis, double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  switch (axis) {
    case 'X': return Quat::from_axis_angle({1, 0, 0}, rad);
    case 'Y': return Quat::from_axis_angle({0, 1, 0}, rad);
    default: return Quat::from_axis_angle({0, 0, 1}, rad);
  }
}

}  // namespace bvh_detail

inline BvhResult import_bvh(const std::string& text, double scale = 1.0) {
  using namespace bvh_detail;
  ParseState ps;
  {
    std::istringstream ss(text);
    std::string l;
    while (std::getline(ss, l)) ps.lines.push_back(l);
  }

  auto expect = [&](const char* what) {
    auto t = ps.take();
    if (t[0] != what) ps.fail(std::string("expected '") + what + "', got '" + t[0] + "'");
    return t;
  };

  expect("HIERARCHY");

  BvhResult out;
  Skeleton& skel = out.skeleton;
  std::vector<Channel> channels;
  std::vector<int> rot_channel_count;

  // recursive-descent over the joint tree
  auto parse_joint = [&](auto&& self, int parent, const std::string& name) -> void {
    const int index = static_cast<int>(skel.joints.size());
    skel.joints.push_back({name, parent, {}, JointKind::kFixed, {0, 0, 1}});
    rot_channel_count.push_back(0);
    expect("{");
    while (true) {
      auto t = ps.take();
      if (t[0] == "OFFSET") {
        if (t.size() != 4) ps.fail("OFFSET needs 3 values");
        skel.joints[index].offset = {parse_number(t[1], ps) * scale, parse_number(t[2], ps) * scale,
                                     parse_number(t[3], ps) * scale};
      } else if (t[0] == "CHANNELS") {
        if (t.size() < 2) ps.fail("CHANNELS needs a count");
        const std::size_t n = static_cast<std::size_t>(parse_number(t[1], ps));
        if (t.size() != 2 + n) ps.fail("CHANNELS count does not match the listed channels");
        for (std::size_t c = 0; c < n; ++c) {
          const std::string& ch = t[2 + c];
          if (ch == "Xposition" || ch == "Yposition" || ch == "Zposition") {
            if (index != 0) ps.fail("position channels are only supported on the root");
            channels.push_back({static_cast<std::size_t>(index), ch[0], false});
          } else if (ch == "Xrotation" || ch == "Yrotation" || ch == "Zrotation") {
            channels.push_back({static_cast<std::size_t>(index), ch[0], true});
            rot_channel_count[index] += 1;
          } else {
            ps.fail("unknown channel '" + ch + "'");
          }
        }
      } else if (t[0] == "JOINT") {
        if (t.size() < 2) ps.fail("JOINT needs a name");
        self(self, index, t[1]);
      } else if (t[0] == "End") {
        expect("{");
        auto off = expect("OFFSET");
        if (off.size() != 4) ps.fail("OFFSET needs 3 values");
        skel.joints.push_back({name + "_end",
                               index,
                               {parse_number(off[1], ps) * scale, parse_number(off[2], ps) * scale,
                                parse_number(off[3], ps) * scale},
                               JointKind::kFixed,
                               {0, 0, 1}});
        rot_channel_count.push_back(0);
        expect("}");
      } else if (t[0] == "}") {
        return;
      } else {
        ps.fail("unexpected token '" + t[0] + "'");
      }
    }
  };

  auto root_tok = expect("ROOT");
  if (root_tok.size() < 2) ps.fail("ROOT needs a name");
  parse_joint(parse_joint, -1, root_tok[1]);

  // joints with rotation channels become 3-dof joints driven by rotation
  // vectors converted from the per-frame Euler angles
  for (std::size_t j = 0; j < skel.joints.size(); ++j)
    if (rot_channel_count[j] > 0 && j > 0) skel.joints[j].kind = JointKind::kRevolute3;

  // leaf joints with end-effector-ish names get role tags
  for (std::size_t j = 0; j < skel.joints.size(); ++j) {
    bool leaf = true;
    for (const Joint& other : skel.joints) leaf &= other.parent != static_cast<int>(j);
    if (!leaf) continue;
    std::string lower = skel.joints[j].name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    auto has = [&](const char* s) { return lower.find(s) != std::string::npos; };
    if (has("foot") || has("toe") || has("ankle"))
      skel.end_effectors.push_back({j, EndEffectorRole::kFoot});
    else if (has("hand") || has("wrist") || has("finger"))
      skel.end_effectors.push_back({j, EndEffectorRole::kHand});
    else if (has("head"))
      skel.end_effectors.push_back({j, EndEffectorRole::kHead});
  }

  skel.name = "bvh:" + skel.joints[0].name;

  expect("MOTION");
  auto frames_tok = expect("Frames:");
  if (frames_tok.size() != 2) ps.fail("Frames: needs a count");
  const std::size_t frame_count = static_cast<std::size_t>(parse_number(frames_tok[1], ps));
  auto ft = ps.take();
  if (ft.size() != 3 || ft[0] != "Frame" || ft[1] != "Time:") ps.fail("expected 'Frame Time:'");
  out.trajectory.dt = parse_number(ft[2], ps);
  require(out.trajectory.dt > 0, "bvh: frame time must be positive");

  // the root OFFSET folds into the per-frame root positions below
  const Vec3 root_offset = skel.joints[0].offset;
  skel.joints[0].offset = {0, 0, 0};

  std::size_t rows = 0;
  const auto value_offsets = joint_value_offsets(skel);
  while (!ps.done()) {
    auto t = ps.peek();
    if (t.empty()) break;
    ps.current = ps.line;
    ++ps.line;
    if (t.size() != channels.size())
      ps.fail("frame row has " + std::to_string(t.size()) + " values, expected " +
              std::to_string(channels.size()));
    Pose pose;
    pose.joint_values.assign(skel.dof(), 0.0);
    std::vector<Quat> joint_rot(skel.joints.size(), Quat::identity());
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const double v = parse_number(t[c], ps);
      const Channel& ch = channels[c];
      if (!ch.rotation) {
        if (ch.axis == 'X') pose.root_position.x += v * scale;
        if (ch.axis == 'Y') pose.root_position.y += v * scale;
        if (ch.axis == 'Z') pose.root_position.z += v * scale;
      } else {
        joint_rot[ch.joint] = joint_rot[ch.joint] * rotation_of(ch.axis, v);
      }
    }
    pose.root_position += root_offset;
    pose.root_orientation = joint_rot[0].normalized();
    for (std::size_t j = 1; j < skel.joints.size(); ++j) {
      if (skel.joints[j].kind != JointKind::kRevolute3) continue;
      const Vec3 r = joint_rot[j].to_rotvec();
      pose.joint_values[value_offsets[j]] = r.x;
      pose.joint_values[value_offsets[j] + 1] = r.y;
      pose.joint_values[value_offsets[j] + 2] = r.z;
    }
    out.trajectory.frames.push_back(std::move(pose));
    ++rows;
  }
  if (rows != frame_count)
    throw ValidationError("bvh: header declares " + std::to_string(frame_count) +
                          " frames but found " + std::to_string(rows) + " rows");

  // body length from the rest-pose vertical extent
  Pose rest;
  rest.joint_values.assign(skel.dof(), 0.0);
  double zmin = 0, zmax = 0;
  for (const Transform& tr : forward_kinematics(skel, rest)) {
    zmin = std::min(zmin, tr.translation.z);
    zmax = std::max(zmax, tr.translation.z);
  }
  skel.body_length = zmax - zmin > 1e-6 ? zmax - zmin : 1.0;

  out.trajectory.skeleton_id = skel.name;
  skel.validate();
  out.trajectory.validate(skel);
  return out;
}

}  // namespace ace
