#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "tzclock/errors.hpp"

namespace tzclock {

// Inverse of std::erfc on (0, 2): safeguarded Newton iteration inside a
// shrinking bracket. erfc is strictly decreasing, so the bracket always holds
// the root and the iteration falls back to bisection when Newton leaves it.
inline double erfc_inv(double y) {
  if (!(y > 0.0 && y < 2.0)) throw InvalidArgument("erfc_inv: argument must lie in (0, 2)");
  if (y == 1.0) return 0.0;
  if (y > 1.0) return -erfc_inv(2.0 - y);

  double lo = 0.0;   // erfc(lo) >= y
  double hi = 27.0;  // erfc(27) underflows below any representable y > 0
  while (std::erfc(hi) > y) hi *= 2.0;

  // Start from the asymptotic tail estimate x ~ sqrt(-log(y)).
  double x = std::clamp(std::sqrt(std::max(-std::log(y), 0.0)), lo, hi);
  const double two_over_sqrt_pi = 2.0 / std::sqrt(std::acos(-1.0));
  for (int iter = 0; iter < 200; ++iter) {
    const double f = std::erfc(x) - y;
    if (f == 0.0) return x;
    if (f > 0.0) lo = x; else hi = x;
    const double slope = -two_over_sqrt_pi * std::exp(-x * x);
    double next = slope != 0.0 ? x - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x))
      return next;
    x = next;
  }
  return x;
}

}  // namespace tzclock
