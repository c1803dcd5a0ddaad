#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ace/rng.hpp"
#include "ace/tape.hpp"

namespace ace {

enum class Activation { kLinear, kLeakyRelu, kSilu, kSigmoid, kTanh };

inline constexpr double kLeakyReluSlope = 0.01;

inline std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kSilu: return "silu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
  }
  return "?";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "linear") return Activation::kLinear;
  if (s == "leaky_relu") return Activation::kLeakyRelu;
  if (s == "silu") return Activation::kSilu;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "tanh") return Activation::kTanh;
  throw ValidationError("unknown activation: " + s);
}

/// Fully connected network shape: input width, hidden widths, output width,
/// one activation for hidden layers and one for the output layer.
struct LayerSpec {
  std::size_t input = 0;
  std::vector<std::size_t> hidden;
  std::size_t output = 0;
  Activation hidden_activation = Activation::kLeakyRelu;
  Activation output_activation = Activation::kLinear;

  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w{input};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(output);
    return w;
  }
};

/// Parameters of one MLP: weights[l] is [out_l, in_l], biases[l] is [out_l, 1].
struct MlpParams {
  LayerSpec spec;
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  std::size_t layer_count() const { return weights.size(); }

  /// He-style uniform fan-in init for hidden layers; the output layer starts
  /// at zero so a fresh network is the zero function.
  static MlpParams init(const LayerSpec& spec, Rng& rng) {
    MlpParams p;
    p.spec = spec;
    const auto w = spec.widths();
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
      const std::size_t fan_in = w[l], fan_out = w[l + 1];
      Tensor W(fan_out, fan_in);
      Tensor b(fan_out, 1);
      const bool is_output = (l + 2 == w.size());
      if (!is_output) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (double& v : W.data) v = rng.uniform(-bound, bound);
      }
      p.weights.push_back(std::move(W));
      p.biases.push_back(std::move(b));
    }
    return p;
  }

  void validate() const {
    const auto w = spec.widths();
    require(weights.size() + 1 == w.size() && biases.size() == weights.size(),
            "MlpParams: layer count does not match spec");
    for (std::size_t l = 0; l < weights.size(); ++l) {
      require(weights[l].rows() == w[l + 1] && weights[l].cols() == w[l],
              "MlpParams: weight shape inconsistent with spec");
      require(biases[l].rows() == w[l + 1] && biases[l].cols() == 1,
              "MlpParams: bias shape inconsistent with spec");
      require_finite(weights[l].data, "MlpParams weight");
      require_finite(biases[l].data, "MlpParams bias");
    }
  }
};

/// Parameter node ids of an MLP pushed onto a tape.
struct MlpOnTape {
  std::vector<int> weights;
  std::vector<int> biases;

  std::vector<int> all() const {
    std::vector<int> ids = weights;
    ids.insert(ids.end(), biases.begin(), biases.end());
    return ids;
  }
};

/// Push parameters as leaves (trainable) or constants (frozen).
inline MlpOnTape push_mlp(Tape& tape, const MlpParams& p, bool trainable) {
  MlpOnTape m;
  for (const Tensor& w : p.weights)
    m.weights.push_back(trainable ? tape.leaf(w) : tape.constant(w));
  for (const Tensor& b : p.biases)
    m.biases.push_back(trainable ? tape.leaf(b) : tape.constant(b));
  return m;
}

inline int apply_activation(Tape& tape, int x, Activation act) {
  switch (act) {
    case Activation::kLinear: return x;
    case Activation::kLeakyRelu: return tape.leaky_relu(x, kLeakyReluSlope);
    case Activation::kSilu: return tape.mul(x, tape.sigmoid(x));
    case Activation::kSigmoid: return tape.sigmoid(x);
    case Activation::kTanh: return tape.tanh(x);
  }
  throw ValidationError("apply_activation: unknown activation");
}

/// Forward pass of the MLP over a batch [input, B]; records on the tape.
inline int mlp_forward(Tape& tape, const MlpOnTape& m, const LayerSpec& spec, int x) {
  const Tensor& in = tape.value(x);
  require(in.rows() == spec.input, "mlp_forward: input width mismatch");
  require_finite(in.data, "mlp_forward input");
  const std::size_t batch = in.cols();
  int h = x;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const int pre = tape.add(tape.matmul(m.weights[l], h),
                             tape.broadcast_cols(m.biases[l], batch));
    const bool is_output = (l + 1 == m.weights.size());
    h = apply_activation(tape, pre, is_output ? spec.output_activation : spec.hidden_activation);
  }
  return h;
}

/// Plain (tape-free) evaluation for inference paths.
inline std::vector<double> mlp_eval(const MlpParams& p, std::span<const double> input) {
  require(input.size() == p.spec.input, "mlp_eval: input width mismatch");
  std::vector<double> h(input.begin(), input.end());
  auto act_inplace = [](std::vector<double>& v, Activation act) {
    switch (act) {
      case Activation::kLinear: return;
      case Activation::kLeakyRelu:
        for (double& x : v) x = x >= 0 ? x : kLeakyReluSlope * x;
        return;
      case Activation::kSilu:
        for (double& x : v) x = x / (1.0 + std::exp(-x));
        return;
      case Activation::kSigmoid:
        for (double& x : v) x = 1.0 / (1.0 + std::exp(-x));
        return;
      case Activation::kTanh:
        for (double& x : v) x = std::tanh(x);
        return;
    }
  };
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const Tensor& W = p.weights[l];
    const Tensor& b = p.biases[l];
    std::vector<double> out(W.rows());
    for (std::size_t i = 0; i < W.rows(); ++i) {
      double s = b.data[i];
      const double* row = &W.data[i * W.cols()];
      for (std::size_t j = 0; j < W.cols(); ++j) s += row[j] * h[j];
      out[i] = s;
    }
    h = std::move(out);
    act_inplace(h, l + 1 == p.weights.size() ? p.spec.output_activation : p.spec.hidden_activation);
  }
  return h;
}

}  // namespace ace
