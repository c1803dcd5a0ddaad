#pragma once

#include <array>
#include <cmath>

#include "ace/common.hpp"

namespace ace {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    const double n = norm();
    return n > 0 ? *this / n : Vec3{};
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Unit quaternion (w, x, y, z). Rotation convention: q rotates body-frame
/// vectors into the world frame, q1 * q2 applies q2 first.
struct Quat {
  double w = 1, x = 0, y = 0, z = 0;

  static Quat identity() { return {1, 0, 0, 0}; }

  static Quat from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (n < 1e-300) return identity();
    const double h = 0.5 * angle;
    const double s = std::sin(h) / n;
    return {std::cos(h), axis.x * s, axis.y * s, axis.z * s};
  }

  /// Exponential map: rotation vector (axis * angle) to quaternion.
  static Quat from_rotvec(const Vec3& r) {
    const double angle = r.norm();
    if (angle < 1e-12) {
      // first-order expansion, normalized
      Quat q{1.0, 0.5 * r.x, 0.5 * r.y, 0.5 * r.z};
      return q.normalized();
    }
    return from_axis_angle(r, angle);
  }

  static Quat yaw(double angle) { return from_axis_angle({0, 0, 1}, angle); }

  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }

  Quat conjugate() const { return {w, -x, -y, -z}; }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quat normalized() const {
    const double n = norm();
    if (n < 1e-300) return identity();
    return {w / n, x / n, y / n, z / n};
  }

  /// Same rotation with w >= 0, so equal rotations have equal components.
  Quat canonical() const { return w < 0 ? Quat{-w, -x, -y, -z} : *this; }

  Vec3 rotate(const Vec3& v) const {
    // q v q*
    const Vec3 u{x, y, z};
    const Vec3 t = 2.0 * u.cross(v);
    return v + w * t + u.cross(t);
  }

  /// Log map: rotation vector of this quaternion (angle in [0, pi]).
  Vec3 to_rotvec() const {
    const Quat q = normalized().canonical();
    const double sin_half = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
    if (sin_half < 1e-12) return {2.0 * q.x, 2.0 * q.y, 2.0 * q.z};
    const double angle = 2.0 * std::atan2(sin_half, q.w);
    const double s = angle / sin_half;
    return {q.x * s, q.y * s, q.z * s};
  }
};

/// Rigid transform: p_world = rotation.rotate(p_local) + translation.
struct Transform {
  Quat rotation = Quat::identity();
  Vec3 translation{};

  static Transform identity() { return {}; }

  Transform compose(const Transform& child) const {
    return {(rotation * child.rotation).normalized(),
            translation + rotation.rotate(child.translation)};
  }

  Vec3 apply(const Vec3& p) const { return rotation.rotate(p) + translation; }

  Transform inverse() const {
    const Quat r = rotation.conjugate();
    return {r, r.rotate(translation) * -1.0};
  }
};

/// Heading angle (yaw) of the +x body axis projected to the horizontal plane.
/// Returns false when the projection norm is below tol (facing vertical).
inline bool heading_of(const Quat& q, double& heading, double tol = 1e-6) {
  const Vec3 f = q.rotate({1, 0, 0});
  const double n = std::sqrt(f.x * f.x + f.y * f.y);
  if (n < tol) return false;
  heading = std::atan2(f.y, f.x);
  return true;
}

}  // namespace ace
