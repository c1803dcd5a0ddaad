#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ace/checkpoint.hpp"
#include "ace/dataset.hpp"

namespace ace {

using Json = nlohmann::ordered_json;

namespace schema {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

inline const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing field");
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline Vec3 vec3(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected an array of 3 numbers");
  return {number(j[0], path), number(j[1], path), number(j[2], path)};
}

inline Quat quat(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) fail(path, "expected an array of 4 numbers");
  return {number(j[0], path), number(j[1], path), number(j[2], path), number(j[3], path)};
}

}  // namespace schema

inline std::string joint_kind_name(JointKind k) {
  switch (k) {
    case JointKind::kRevolute3: return "revolute-3dof";
    case JointKind::kRevolute1: return "revolute-1dof";
    case JointKind::kPrismatic: return "prismatic";
    case JointKind::kFixed: return "fixed";
  }
  return "?";
}

inline JointKind joint_kind_from_name(const std::string& s, const std::string& path) {
  if (s == "revolute-3dof") return JointKind::kRevolute3;
  if (s == "revolute-1dof") return JointKind::kRevolute1;
  if (s == "prismatic") return JointKind::kPrismatic;
  if (s == "fixed") return JointKind::kFixed;
  schema::fail(path, "unknown joint kind '" + s + "'");
}

inline Json skeleton_to_json(const Skeleton& s) {
  Json j;
  j["name"] = s.name;
  Json joints = Json::array();
  for (const Joint& jt : s.joints) {
    Json o;
    o["name"] = jt.name;
    o["parent"] = jt.parent;
    o["offset"] = {jt.offset.x, jt.offset.y, jt.offset.z};
    o["kind"] = joint_kind_name(jt.kind);
    if (jt.kind == JointKind::kRevolute1 || jt.kind == JointKind::kPrismatic)
      o["axis"] = {jt.axis.x, jt.axis.y, jt.axis.z};
    joints.push_back(std::move(o));
  }
  j["joints"] = std::move(joints);
  Json ees = Json::array();
  for (const EndEffector& e : s.end_effectors)
    ees.push_back({{"joint", e.joint}, {"role", ee_role_name(e.role)}});
  j["end_effectors"] = std::move(ees);
  j["body_length"] = s.body_length;
  j["foot_indices"] = s.foot_indices();
  return j;
}

inline Skeleton skeleton_from_json(const Json& j, const std::string& path = "skeleton") {
  Skeleton s;
  s.name = schema::field(j, "name", path).get<std::string>();
  const Json& joints = schema::field(j, "joints", path);
  if (!joints.is_array()) schema::fail(path + ".joints", "expected an array");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string jp = path + ".joints[" + std::to_string(i) + "]";
    const Json& o = joints[i];
    Joint jt;
    jt.name = schema::field(o, "name", jp).get<std::string>();
    jt.parent = static_cast<int>(schema::number(schema::field(o, "parent", jp), jp + ".parent"));
    jt.offset = schema::vec3(schema::field(o, "offset", jp), jp + ".offset");
    jt.kind = joint_kind_from_name(schema::field(o, "kind", jp).get<std::string>(), jp + ".kind");
    if (jt.kind == JointKind::kRevolute1 || jt.kind == JointKind::kPrismatic)
      jt.axis = schema::vec3(schema::field(o, "axis", jp), jp + ".axis");
    s.joints.push_back(std::move(jt));
  }
  const Json& ees = schema::field(j, "end_effectors", path);
  for (std::size_t i = 0; i < ees.size(); ++i) {
    const std::string ep = path + ".end_effectors[" + std::to_string(i) + "]";
    EndEffector e;
    e.joint = static_cast<std::size_t>(
        schema::number(schema::field(ees[i], "joint", ep), ep + ".joint"));
    e.role = ee_role_from_name(schema::field(ees[i], "role", ep).get<std::string>());
    s.end_effectors.push_back(e);
  }
  s.body_length = schema::number(schema::field(j, "body_length", path), path + ".body_length");
  s.validate();
  return s;
}

inline Json pose_to_json(const Pose& p) {
  Json j;
  j["root_position"] = {p.root_position.x, p.root_position.y, p.root_position.z};
  j["root_orientation"] = {p.root_orientation.w, p.root_orientation.x, p.root_orientation.y,
                           p.root_orientation.z};
  j["joint_values"] = p.joint_values;
  return j;
}

inline Pose pose_from_json(const Json& j, const std::string& path) {
  Pose p;
  p.root_position = schema::vec3(schema::field(j, "root_position", path), path + ".root_position");
  p.root_orientation =
      schema::quat(schema::field(j, "root_orientation", path), path + ".root_orientation");
  const Json& jv = schema::field(j, "joint_values", path);
  if (!jv.is_array()) schema::fail(path + ".joint_values", "expected an array");
  for (std::size_t k = 0; k < jv.size(); ++k)
    p.joint_values.push_back(schema::number(jv[k], path + ".joint_values"));
  return p;
}

inline Json frames_to_json(const Trajectory& t) {
  Json frames = Json::array();
  for (const Pose& p : t.frames) frames.push_back(pose_to_json(p));
  return frames;
}

inline std::vector<Pose> frames_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) schema::fail(path, "expected an array");
  std::vector<Pose> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(pose_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

/// Single-motion file: {skeleton, dt, frames}.
inline Json motion_to_json(const Skeleton& skel, const Trajectory& traj) {
  Json j;
  j["skeleton"] = skeleton_to_json(skel);
  j["dt"] = traj.dt;
  j["frames"] = frames_to_json(traj);
  return j;
}

inline std::pair<Skeleton, Trajectory> motion_from_json(const Json& j,
                                                        const std::string& path = "motion") {
  Skeleton skel = skeleton_from_json(schema::field(j, "skeleton", path), path + ".skeleton");
  Trajectory traj;
  traj.skeleton_id = skel.name;
  traj.dt = schema::number(schema::field(j, "dt", path), path + ".dt");
  require(traj.dt > 0, path + ".dt: must be positive");
  traj.frames = frames_from_json(schema::field(j, "frames", path), path + ".frames");
  traj.validate(skel);
  return {std::move(skel), std::move(traj)};
}

/// Dataset file: {skeleton, trajectories: [{dt, frames}]}.
inline Json dataset_to_json(const MotionDataset& ds) {
  Json j;
  j["skeleton"] = skeleton_to_json(ds.skeleton);
  Json trajs = Json::array();
  for (const Trajectory& t : ds.trajectories) {
    Json o;
    o["dt"] = t.dt;
    o["frames"] = frames_to_json(t);
    trajs.push_back(std::move(o));
  }
  j["trajectories"] = std::move(trajs);
  return j;
}

inline MotionDataset dataset_from_json(const Json& j, const std::string& path = "dataset") {
  MotionDataset ds;
  ds.skeleton = skeleton_from_json(schema::field(j, "skeleton", path), path + ".skeleton");
  const Json& trajs = schema::field(j, "trajectories", path);
  if (!trajs.is_array()) schema::fail(path + ".trajectories", "expected an array");
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const std::string tp = path + ".trajectories[" + std::to_string(i) + "]";
    Trajectory t;
    t.skeleton_id = ds.skeleton.name;
    t.dt = schema::number(schema::field(trajs[i], "dt", tp), tp + ".dt");
    require(t.dt > 0, tp + ".dt: must be positive");
    t.frames = frames_from_json(schema::field(trajs[i], "frames", tp), tp + ".frames");
    ds.trajectories.push_back(std::move(t));
  }
  ds.validate();
  return ds;
}

inline Json parse_json_file(const std::filesystem::path& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

inline void save_dataset(const std::filesystem::path& path, const MotionDataset& ds) {
  write_file_atomic(path, dataset_to_json(ds).dump(1) + "\n");
}

inline MotionDataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_json(parse_json_file(path), path.filename().string());
}

inline void save_motion(const std::filesystem::path& path, const Skeleton& skel,
                        const Trajectory& traj) {
  write_file_atomic(path, motion_to_json(skel, traj).dump(1) + "\n");
}

inline std::pair<Skeleton, Trajectory> load_motion(const std::filesystem::path& path) {
  return motion_from_json(parse_json_file(path), path.filename().string());
}

}  // namespace ace
