#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace ace {

inline constexpr const char* kVersion = "0.1.0";

/// Rejected input: dimensions, schema, or preconditions violated. CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: non-finite values, divergence. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

inline void require_finite(std::span<const double> xs, const std::string& what) {
  if (!all_finite(xs)) throw NumericalError(what + ": non-finite values");
}

}  // namespace ace
