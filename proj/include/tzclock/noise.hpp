#pragma once

// Laser phase trajectories, projection-noise accounting and the measurement
// error channel. Time inside this header is in "fit units": the caller
// converts sequence microseconds with LaserNoiseParams::time_unit_us.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "tzclock/angles.hpp"
#include "tzclock/errors.hpp"
#include "tzclock/phase_inversion.hpp"
#include "tzclock/qubit.hpp"
#include "tzclock/random.hpp"

namespace tzclock {

enum class NoiseKind { shot_to_shot_frequency, random_walk_phase, power_law_sigma };

inline std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::shot_to_shot_frequency: return "shot-to-shot-frequency";
    case NoiseKind::random_walk_phase: return "random-walk-phase";
    case NoiseKind::power_law_sigma: return "power-law-sigma";
  }
  return "?";
}

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "shot-to-shot-frequency") return NoiseKind::shot_to_shot_frequency;
  if (s == "random-walk-phase") return NoiseKind::random_walk_phase;
  if (s == "power-law-sigma") return NoiseKind::power_law_sigma;
  throw InvalidArgument("unknown noise kind '" + std::string(s) + "'");
}

// The marginal spread of theta(t) is beta * t^alpha for every kind:
//   shot-to-shot-frequency: alpha is 1 (one Gaussian frequency per shot),
//   random-walk-phase:      alpha is 1/2 (Wiener phase),
//   power-law-sigma:        alpha is free (time-rescaled Wiener phase).
struct LaserNoiseParams {
  NoiseKind kind = NoiseKind::power_law_sigma;
  double beta = 0.0;   // rad per fit-unit^alpha
  double alpha = 0.5;  // only read for power-law-sigma
  double time_unit_us = 1000.0;

  double effective_alpha() const {
    switch (kind) {
      case NoiseKind::shot_to_shot_frequency: return 1.0;
      case NoiseKind::random_walk_phase: return 0.5;
      case NoiseKind::power_law_sigma: return alpha;
    }
    return alpha;
  }

  // Marginal standard deviation of theta at fit time t.
  double sigma_at(double t) const { return beta * std::pow(t, effective_alpha()); }

  void validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("noise: beta must be >= 0");
    if (kind == NoiseKind::power_law_sigma && !(alpha > 0.0 && alpha <= 1.5))
      throw InvalidArgument("noise: alpha must lie in (0, 1.5]");
    if (!(time_unit_us > 0.0) || !std::isfinite(time_unit_us))
      throw InvalidArgument("noise: time_unit_us must be positive");
  }
};

struct SpamParams {
  double survival = 0.9995;
  double detect = 0.9997;
  double eject = 0.9967;
  double readout_pulse_fidelity = 0.9982;

  static SpamParams perfect() { return {1.0, 1.0, 1.0, 1.0}; }

  bool is_perfect() const {
    return survival == 1.0 && detect == 1.0 && eject == 1.0 && readout_pulse_fidelity == 1.0;
  }

  // Probability of reading "excited" for a true excited / ground atom.
  double p_read_excited_given_excited() const { return survival * detect; }
  double p_read_excited_given_ground() const { return 1.0 - eject; }

  // Expected measured excited fraction for an ideal excited probability p.
  double measured_fraction(double p) const {
    return p * p_read_excited_given_excited() + (1.0 - p) * p_read_excited_given_ground();
  }

  // Inverse of measured_fraction, clamped to [0, 1].
  double corrected_fraction(double measured) const {
    const double lo = p_read_excited_given_ground();
    const double hi = p_read_excited_given_excited();
    return std::clamp((measured - lo) / (hi - lo), 0.0, 1.0);
  }

  void validate() const {
    for (double p : {survival, detect, eject, readout_pulse_fidelity}) {
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("spam: probabilities must lie in [0, 1]");
    }
    if (!(p_read_excited_given_excited() > p_read_excited_given_ground()))
      throw InvalidArgument("spam: channel is not informative (survival*detect <= 1-eject)");
  }
};

struct NoiseTrajectory {
  std::vector<double> times;   // fit units, times[0] == 0
  std::vector<double> phases;  // theta(times[i]), phases[0] == 0
  std::uint64_t seed = 0;
};

inline NoiseTrajectory sample_trajectory(const LaserNoiseParams& params,
                                         const std::vector<double>& t_grid, std::uint64_t seed) {
  params.validate();
  if (t_grid.empty() || t_grid.front() != 0.0)
    throw InvalidArgument("sample_trajectory: grid must start at 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= t_grid[i - 1]) || !std::isfinite(t_grid[i]))
      throw InvalidArgument("sample_trajectory: grid must be ascending");
  }

  NoiseTrajectory out{t_grid, std::vector<double>(t_grid.size(), 0.0), seed};
  if (params.beta == 0.0) return out;

  Engine rng = derive_stream(seed, {static_cast<std::uint64_t>(StreamPurpose::laser)});
  std::normal_distribution<double> gauss(0.0, 1.0);

  switch (params.kind) {
    case NoiseKind::shot_to_shot_frequency: {
      const double frequency = params.beta * gauss(rng);
      for (std::size_t i = 0; i < t_grid.size(); ++i) out.phases[i] = frequency * t_grid[i];
      break;
    }
    case NoiseKind::random_walk_phase:
    case NoiseKind::power_law_sigma: {
      // theta(t) = beta * W(t^(2 alpha)); random walk is the alpha = 1/2 case.
      const double two_alpha = 2.0 * params.effective_alpha();
      double clock_prev = 0.0;
      for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double clock = std::pow(t_grid[i], two_alpha);
        const double step = std::sqrt(std::max(clock - clock_prev, 0.0));
        out.phases[i] = out.phases[i - 1] + params.beta * step * gauss(rng);
        clock_prev = clock;
      }
      break;
    }
  }
  return out;
}

// Samples the true outcome, then the imaging channel in physical order:
// survival and detection act on excited atoms, failed ejection on ground atoms.
inline bool apply_spam(double p_ideal, const SpamParams& spam, Engine& rng) {
  const double u_state = uniform01(rng);
  const double u_channel = uniform01(rng);
  const bool excited = u_state < p_ideal;
  if (excited) return u_channel < spam.survival * spam.detect;
  return u_channel < 1.0 - spam.eject;
}

// Unravelled depolarizing channel rho -> (1-p) rho + p I/2: a uniformly
// chosen Pauli with probability 3p/4. Always consumes one draw.
inline QubitState depolarize(const QubitState& s, double probability, Engine& rng) {
  const double u = uniform01(rng);
  if (probability <= 0.0) return s;
  const double quarter = 0.25 * probability;
  if (u < quarter) return apply_pauli(s, Pauli::x);
  if (u < 2.0 * quarter) return apply_pauli(s, Pauli::y);
  if (u < 3.0 * quarter) return apply_pauli(s, Pauli::z);
  return s;
}

// Monte Carlo spread of the dual-quadrature estimator caused by finite atom
// number alone. The true phase is drawn uniformly per trial; both quadratures
// are binomially sampled with fringe contrast `contrast`. A trial where both
// quadratures land exactly on one half carries no phase information and is
// assigned a uniformly random estimate.
inline double qpn_sigma_oracle(int n_atoms_per_quadrature, double contrast, int n_trials,
                               std::uint64_t seed) {
  if (n_atoms_per_quadrature < 1) throw InvalidArgument("qpn_sigma_oracle: need >= 1 atom");
  if (!(contrast > 0.0 && contrast <= 1.0))
    throw InvalidArgument("qpn_sigma_oracle: contrast must lie in (0, 1]");
  if (n_trials < 10000) throw InvalidArgument("qpn_sigma_oracle: need >= 1e4 trials");

  Engine rng = derive_stream(seed, {static_cast<std::uint64_t>(StreamPurpose::trials)});
  std::uniform_real_distribution<double> phase_dist(-pi, pi);
  const double n = static_cast<double>(n_atoms_per_quadrature);
  double sum_sq = 0.0;
  for (int i = 0; i < n_trials; ++i) {
    const double theta = phase_dist(rng);
    const double px = 0.5 * (1.0 + contrast * std::cos(theta));
    const double py = 0.5 * (1.0 + contrast * std::sin(theta));
    const auto kx = std::binomial_distribution<int>(n_atoms_per_quadrature, px)(rng);
    const auto ky = std::binomial_distribution<int>(n_atoms_per_quadrature, py)(rng);
    const double fallback = phase_dist(rng);
    double estimate = fallback;
    if (2 * kx != n_atoms_per_quadrature || 2 * ky != n_atoms_per_quadrature)
      estimate = estimate_phase_from_populations(kx / n, ky / n);
    const double d = wrap_to_pi(estimate - theta);
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq / n_trials);
}

}  // namespace tzclock
