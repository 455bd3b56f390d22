#pragma once

#include <algorithm>
#include <cmath>

#include "tzclock/angles.hpp"
#include "tzclock/errors.hpp"

namespace tzclock {

// Dual-quadrature inversion: arg((2Px - 1) + i (2Py - 1)), in (-pi, pi].
inline double estimate_phase_from_populations(double p_x, double p_y) {
  const double zx = 2.0 * p_x - 1.0;
  const double zy = 2.0 * p_y - 1.0;
  if (zx == 0.0 && zy == 0.0)
    throw UndefinedPhaseError("estimate_phase: both quadratures at exactly 0.5");
  const double theta = std::atan2(zy, zx);
  return theta == -pi ? pi : theta;
}

// Single-basis inversion arcsin(2Py - 1); only invertible on [-pi/2, pi/2].
inline double estimate_phase_single_basis(double p_y) {
  return std::asin(std::clamp(2.0 * p_y - 1.0, -1.0, 1.0));
}

}  // namespace tzclock
