#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "ace/common.hpp"

namespace ace {

/// Dense row-major tensor of 64-bit floats. The tape works exclusively on
/// rank-2 tensors (scalars are 1x1, column vectors n x 1).
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape{rows, cols}, data(rows * cols, fill) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
  }

  static Tensor column(std::initializer_list<double> vs) {
    Tensor t(vs.size(), 1);
    std::size_t i = 0;
    for (double v : vs) t.data[i++] = v;
    return t;
  }

  static Tensor column(const std::vector<double>& vs) {
    Tensor t(vs.size(), 1);
    t.data = vs;
    return t;
  }

  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  std::size_t size() const { return data.size(); }

  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  void check_invariants() const {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    require(n == data.size(), "Tensor: data length does not match shape");
    require_finite(data, "Tensor");
  }
};

}  // namespace ace
