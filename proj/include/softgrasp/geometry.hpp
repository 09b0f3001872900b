#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace softgrasp {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// +90 degree rotation.
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

inline Vec2 unit_vector(double angle) { return Vec2(std::cos(angle), std::sin(angle)); }

// Wraps to [0, 2*pi).
inline double normalize_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

// Signed angle rotating `from` onto `to`, in (-pi, pi].
inline double signed_angle(const Vec2& from, const Vec2& to) {
  return std::atan2(cross2(from, to), from.dot(to));
}

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace softgrasp
