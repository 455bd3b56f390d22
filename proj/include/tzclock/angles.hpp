#pragma once

#include <cmath>
#include <numbers>

namespace tzclock {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Maps any finite angle into (-pi, pi]; the boundary -pi maps to +pi.
inline double wrap_to_pi(double angle) {
  double r = std::remainder(angle, two_pi);  // [-pi, pi]
  if (r <= -pi) r += two_pi;
  return r;
}

// Maps into (-half_width, half_width] with period 2*half_width.
inline double wrap_symmetric(double value, double half_width) {
  const double period = 2.0 * half_width;
  double r = std::remainder(value, period);
  if (r <= -half_width) r += period;
  return r;
}

}  // namespace tzclock
