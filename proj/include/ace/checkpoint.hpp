#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ace/network.hpp"
#include "ace/tensor.hpp"

namespace ace {

/// Parameter checkpoint container: 8-byte magic, little-endian u64 header
/// length, JSON header (tensor names/shapes plus model metadata), then all
/// tensor data concatenated as little-endian float64. Round-trips bit-exactly.
struct Checkpoint {
  nlohmann::ordered_json meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return t;
    throw ValidationError("checkpoint: missing tensor '" + name + "'");
  }
  bool has_tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return true;
    return false;
  }
};

namespace detail {

inline void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline void put_f64_le(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64_le(out, bits);  // value-level LE write, endian-agnostic
}

inline double get_f64_le(const unsigned char* p) {
  const std::uint64_t bits = get_u64_le(p);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[9] = "ACECKPT1";

inline std::string encode_checkpoint(const Checkpoint& ckpt) {
  nlohmann::ordered_json header = ckpt.meta;
  nlohmann::ordered_json tensor_list = nlohmann::ordered_json::array();
  for (const auto& [name, t] : ckpt.tensors)
    tensor_list.push_back({{"name", name}, {"shape", t.shape}});
  header["tensors"] = tensor_list;

  const std::string json_text = header.dump();
  std::string out;
  out.append(kCheckpointMagic, 8);
  detail::put_u64_le(out, json_text.size());
  out += json_text;
  for (const auto& [name, t] : ckpt.tensors)
    for (double d : t.data) detail::put_f64_le(out, d);
  return out;
}

inline Checkpoint decode_checkpoint(const std::string& bytes) {
  require(bytes.size() >= 16, "checkpoint: truncated file");
  require(bytes.compare(0, 8, kCheckpointMagic, 8) == 0, "checkpoint: bad magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t json_len = detail::get_u64_le(p + 8);
  require(bytes.size() >= 16 + json_len, "checkpoint: truncated header");

  Checkpoint ckpt;
  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(bytes.substr(16, json_len));
  } catch (const std::exception& e) {
    throw ValidationError(std::string("checkpoint: invalid header JSON: ") + e.what());
  }
  require(header.contains("tensors"), "checkpoint: header missing 'tensors'");

  std::size_t offset = 16 + json_len;
  for (const auto& entry : header["tensors"]) {
    Tensor t;
    t.shape = entry["shape"].get<std::vector<std::size_t>>();
    std::size_t n = 1;
    for (std::size_t e : t.shape) n *= e;
    require(bytes.size() >= offset + 8 * n, "checkpoint: truncated tensor data");
    t.data.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      t.data[i] = detail::get_f64_le(p + offset + 8 * i);
    offset += 8 * n;
    ckpt.tensors.emplace_back(entry["name"].get<std::string>(), std::move(t));
  }
  header.erase("tensors");
  ckpt.meta = header;
  return ckpt;
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    require(f.good(), "cannot open for writing: " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(f.good(), "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

/// Stores an MLP inside a checkpoint under a name prefix.
inline void pack_mlp(Checkpoint& ckpt, const std::string& prefix, const MlpParams& p) {
  nlohmann::ordered_json spec;
  spec["input"] = p.spec.input;
  spec["hidden"] = p.spec.hidden;
  spec["output"] = p.spec.output;
  spec["hidden_activation"] = activation_name(p.spec.hidden_activation);
  spec["output_activation"] = activation_name(p.spec.output_activation);
  ckpt.meta["specs"][prefix] = spec;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    ckpt.tensors.emplace_back(prefix + ".w" + std::to_string(l), p.weights[l]);
    ckpt.tensors.emplace_back(prefix + ".b" + std::to_string(l), p.biases[l]);
  }
}

inline MlpParams unpack_mlp(const Checkpoint& ckpt, const std::string& prefix) {
  require(ckpt.meta.contains("specs") && ckpt.meta["specs"].contains(prefix),
          "checkpoint: missing spec for '" + prefix + "'");
  const auto& spec = ckpt.meta["specs"][prefix];
  MlpParams p;
  p.spec.input = spec["input"].get<std::size_t>();
  p.spec.hidden = spec["hidden"].get<std::vector<std::size_t>>();
  p.spec.output = spec["output"].get<std::size_t>();
  p.spec.hidden_activation = activation_from_name(spec["hidden_activation"].get<std::string>());
  p.spec.output_activation = activation_from_name(spec["output_activation"].get<std::string>());
  const std::size_t layers = p.spec.hidden.size() + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    p.weights.push_back(ckpt.tensor(prefix + ".w" + std::to_string(l)));
    p.biases.push_back(ckpt.tensor(prefix + ".b" + std::to_string(l)));
  }
  p.validate();
  return p;
}

}  // namespace ace
