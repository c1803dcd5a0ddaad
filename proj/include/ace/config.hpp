#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ace/checkpoint.hpp"
#include "ace/common.hpp"

namespace ace {

/// Applies a dotted-path override ("train.steps=500") onto a JSON config
/// tree. Values parse as JSON when possible, otherwise as strings, so
/// `--set data.gaits=["trot","walk"]` and `--set out.dir=runs/a` both work.
inline void apply_override(nlohmann::ordered_json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0,
          "override '" + assignment + "' must look like path.to.field=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  nlohmann::ordered_json value = nlohmann::ordered_json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  nlohmann::ordered_json* node = &config;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
    require(!key.empty(), "override '" + assignment + "' has an empty path segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    begin = dot + 1;
  }
}

/// Loads a JSON config file and applies CLI overrides (overrides win).
inline nlohmann::ordered_json load_config(const std::string& path,
                                          const std::vector<std::string>& overrides) {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  if (!path.empty()) {
    try {
      config = nlohmann::ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ": invalid JSON: " + e.what());
    }
    require(config.is_object(), path + ": config root must be an object");
  }
  for (const std::string& o : overrides) apply_override(config, o);
  return config;
}

namespace cfg {

inline const nlohmann::ordered_json* find(const nlohmann::ordered_json& j,
                                          const std::string& dotted) {
  const nlohmann::ordered_json* node = &j;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', begin);
    const std::string key = dotted.substr(begin, dot == std::string::npos ? dot : dot - begin);
    if (!node->is_object()) return nullptr;
    const auto it = node->find(key);
    if (it == node->end()) return nullptr;
    node = &*it;
    if (dot == std::string::npos) return node;
    begin = dot + 1;
  }
}

template <typename T>
T get_or(const nlohmann::ordered_json& j, const std::string& dotted, T fallback) {
  const auto* node = find(j, dotted);
  if (!node) return fallback;
  try {
    return node->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config field '" + dotted + "': wrong type");
  }
}

template <typename T>
T get_required(const nlohmann::ordered_json& j, const std::string& dotted) {
  const auto* node = find(j, dotted);
  require(node != nullptr, "config field '" + dotted + "' is required");
  try {
    return node->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config field '" + dotted + "': wrong type");
  }
}

}  // namespace cfg

/// Record of one CLI run, written atomically next to the outputs.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json resolved_config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  double wall_time_s = 0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = resolved_config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["seed"] = seed;
    j["tool_version"] = kVersion;
    j["wall_time_s"] = wall_time_s;
    return j;
  }

  void write(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json().dump(1) + "\n");
  }
};

}  // namespace ace
