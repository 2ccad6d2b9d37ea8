#pragma once

#include <cmath>
#include <numbers>
#include <utility>

namespace ctrkit {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

// Maps an angle in degrees onto (-180, 180].
inline double normalize_deg(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  else if (r > 180.0) r -= 360.0;
  return r;
}

// (sin, cos) of an angle in degrees; exact at multiples of 90 degrees so that
// quarter-turn rotations do not leak 1e-17 residues into the plane solve.
inline std::pair<double, double> sincos_deg(double deg) {
  const double n = normalize_deg(deg);
  if (n == 0.0) return {0.0, 1.0};
  if (n == 90.0) return {1.0, 0.0};
  if (n == 180.0) return {0.0, -1.0};
  if (n == -90.0) return {-1.0, 0.0};
  const double r = deg_to_rad(n);
  return {std::sin(r), std::cos(r)};
}

}  // namespace ctrkit
