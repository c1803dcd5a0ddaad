#pragma once

#include <cstddef>
#include <vector>

#include "ace/tensor.hpp"

namespace ace {

/// Bias-corrected Adam over a flat list of parameter tensors.
struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static AdamState init(const std::vector<Tensor>& params, double lr = 3e-4) {
    AdamState s;
    s.lr = lr;
    for (const Tensor& p : params) {
      s.m.emplace_back(p.rows(), p.cols());
      s.v.emplace_back(p.rows(), p.cols());
    }
    return s;
  }
};

/// One Adam update. Rejects non-finite gradients before touching any state.
inline void adam_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads,
                      AdamState& state) {
  require(params.size() == grads.size() && params.size() == state.m.size(),
          "adam_step: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i]->same_shape(grads[i]), "adam_step: gradient shape mismatch");
    if (!all_finite(grads[i].data))
      throw NumericalError("adam_step: non-finite gradient in tensor " + std::to_string(i) +
                           "; step rejected");
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m.data[k] = state.beta1 * m.data[k] + (1.0 - state.beta1) * g.data[k];
      v.data[k] = state.beta2 * v.data[k] + (1.0 - state.beta2) * g.data[k] * g.data[k];
      const double m_hat = m.data[k] / c1;
      const double v_hat = v.data[k] / c2;
      p.data[k] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace ace
