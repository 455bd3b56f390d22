#pragma once

// Cascaded estimation across ensembles whose phase sensitivities form the
// ladder 2^{1-M}, ..., 1/2, 1. Each slower ensemble predicts the next faster
// one's unwrapped phase as twice its own.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tzclock/angles.hpp"
#include "tzclock/errors.hpp"
#include "tzclock/noise.hpp"
#include "tzclock/phase_inversion.hpp"
#include "tzclock/random.hpp"
#include "tzclock/sequence.hpp"
#include "tzclock/simulator.hpp"

namespace tzclock {

struct EnsembleEstimate {
  int m = 0;              // 0 is the fastest ensemble
  double fraction = 1.0;  // 2^-m
  double theta_hat = 0.0;
  int n_x = 0;
  int n_y = 0;
  bool imbalanced = false;  // n_x != n_y
};

struct UnwrapResult {
  double theta_full = 0.0;
  std::vector<int> branch_choices;  // slow to fast; first entry always 0
  bool slip_flag = false;
  double max_stage_residual = 0.0;
};

struct UnwrapOptions {
  // A stage whose reading sits further than this from the prediction marks
  // the result as a suspected slip.
  double slip_threshold = pi / 2;
  // Extra 2pi branches forced at each stage (fault injection).
  std::vector<int> injected_offsets;
};

// `estimates` sorted slow to fast, fractions 2^{1-M}, ..., 1.
inline UnwrapResult cascaded_unwrap(const std::vector<EnsembleEstimate>& estimates,
                                    const UnwrapOptions& opts = {}) {
  const int M = static_cast<int>(estimates.size());
  if (M < 1) throw InvalidArgument("cascaded_unwrap: need >= 1 ensemble");
  for (int s = 0; s < M; ++s) {
    const auto& e = estimates[static_cast<std::size_t>(s)];
    const double expected = std::ldexp(1.0, s - M + 1);
    if (std::abs(e.fraction - expected) > 1e-12 * expected)
      throw InvalidArgument("cascaded_unwrap: fractions must form the ladder 2^{1-M}..1 (stage " +
                            std::to_string(s) + " has " + std::to_string(e.fraction) + ")");
    if (!(e.theta_hat > -pi && e.theta_hat <= pi))
      throw InvalidArgument("cascaded_unwrap: estimates must lie in (-pi, pi]");
  }
  if (!opts.injected_offsets.empty() && opts.injected_offsets.size() != estimates.size())
    throw InvalidArgument("cascaded_unwrap: one injected offset per stage");

  auto injected = [&](int s) {
    return opts.injected_offsets.empty() ? 0 : opts.injected_offsets[static_cast<std::size_t>(s)];
  };

  UnwrapResult out;
  double current = estimates.front().theta_hat + two_pi * injected(0);
  out.branch_choices.push_back(injected(0));
  for (int s = 1; s < M; ++s) {
    const double reading = estimates[static_cast<std::size_t>(s)].theta_hat;
    const double prediction = 2.0 * current;
    const double k_real = (prediction - reading) / two_pi;
    double k = std::round(k_real);
    if (std::abs(k_real - std::floor(k_real) - 0.5) < 1e-12) {
      // Equidistant: keep the branch with the smaller magnitude.
      const double lo = std::floor(k_real), hi = lo + 1.0;
      k = std::abs(reading + two_pi * lo) <= std::abs(reading + two_pi * hi) ? lo : hi;
    }
    const int branch = static_cast<int>(k) + injected(s);
    const double candidate = reading + two_pi * branch;
    out.max_stage_residual = std::max(out.max_stage_residual, std::abs(reading + two_pi * k - prediction));
    out.branch_choices.push_back(branch);
    current = candidate;
  }
  out.theta_full = current;
  out.slip_flag = out.max_stage_residual > opts.slip_threshold;
  return out;
}

inline double ideal_stability_gain(int M) {
  if (M < 1) throw InvalidArgument("ideal_stability_gain: M must be >= 1");
  return std::sqrt(std::ldexp(1.0, M - 1) / M);
}

// Noiseless ladder readings for a true full phase.
inline std::vector<EnsembleEstimate> ideal_ladder(double theta, int M) {
  if (M < 1) throw InvalidArgument("ideal_ladder: M must be >= 1");
  std::vector<EnsembleEstimate> out;
  for (int s = 0; s < M; ++s) {
    const int m = M - 1 - s;
    const double f = std::ldexp(1.0, -m);
    out.push_back({m, f, wrap_to_pi(f * theta), 0, 0, false});
  }
  return out;
}

struct SlipEstimate {
  double probability = 0.0;
  double stderr_ = 0.0;
  double ci_low = 0.0;   // Wilson 95%
  double ci_high = 0.0;
  std::int64_t trials = 0;
  std::int64_t failures = 0;
};

inline SlipEstimate binomial_estimate(std::int64_t failures, std::int64_t trials) {
  if (trials < 1) throw InvalidArgument("binomial_estimate: need >= 1 trial");
  const double n = static_cast<double>(trials);
  const double p = failures / n;
  const double z = 1.959963984540054;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  const double lo = failures == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = failures == trials ? 1.0 : std::min(1.0, centre + half);
  return {p, std::sqrt(p * (1.0 - p) / n), lo, hi, trials, failures};
}

// Monte Carlo slip probability. Trial i draws from stream (seed, trials, i):
// first the true phase, then one Gaussian per stage in slow-to-fast order,
// so runs with different M share their random numbers.
inline SlipEstimate slip_probability_multi(double sigma_full, int M,
                                           const std::vector<double>& per_stage_sigma,
                                           std::int64_t trials, std::uint64_t seed) {
  if (!(sigma_full >= 0.0)) throw InvalidArgument("slip_probability_multi: sigma_full must be >= 0");
  if (M < 1) throw InvalidArgument("slip_probability_multi: M must be >= 1");
  if (per_stage_sigma.size() != static_cast<std::size_t>(M))
    throw InvalidArgument("slip_probability_multi: need one noise sigma per ensemble");
  for (double s : per_stage_sigma)
    if (!(s >= 0.0)) throw InvalidArgument("slip_probability_multi: sigma values must be >= 0");
  if (trials < 1) throw InvalidArgument("slip_probability_multi: need >= 1 trial");

  std::int64_t failures = 0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<EnsembleEstimate> est(static_cast<std::size_t>(M));
  for (std::int64_t i = 0; i < trials; ++i) {
    Engine rng = derive_stream(seed, {static_cast<std::uint64_t>(StreamPurpose::trials),
                                      static_cast<std::uint64_t>(i)});
    const double theta = sigma_full * gauss(rng);
    for (int s = 0; s < M; ++s) {
      const int m = M - 1 - s;
      const double f = std::ldexp(1.0, -m);
      const double noise = per_stage_sigma[static_cast<std::size_t>(s)] * gauss(rng);
      est[static_cast<std::size_t>(s)] = {m, f, wrap_to_pi(f * theta + noise), 0, 0, false};
    }
    const auto r = cascaded_unwrap(est);
    if (std::abs(r.theta_full - theta) >= pi) ++failures;
  }
  return binomial_estimate(failures, trials);
}

// Per-stage noise defaulting to the projection-noise spread of each
// ensemble's atom number (atoms per quadrature, slow to fast).
inline std::vector<double> qpn_stage_sigmas(const std::vector<int>& atoms_per_quadrature,
                                            std::uint64_t seed, int oracle_trials = 20000) {
  std::vector<double> out;
  for (std::size_t s = 0; s < atoms_per_quadrature.size(); ++s)
    out.push_back(qpn_sigma_oracle(atoms_per_quadrature[s], 1.0, oracle_trials, seed + s));
  return out;
}

// Pooled dual-quadrature estimate of every ensemble for one shot of a table,
// returned slow to fast. Fractions are the nominal ladder 2^-m.
inline std::vector<EnsembleEstimate> estimate_ensembles(const EnsembleLayout& layout,
                                                        const ShotTable& table, int shot) {
  layout.validate();
  if (table.n_sites != layout.n_sites())
    throw InvalidArgument("estimate_ensembles: table and layout disagree on site count");
  if (shot < 0 || shot >= table.shots) throw InvalidArgument("estimate_ensembles: shot out of range");
  const int M = layout.n_ensembles();
  std::vector<EnsembleEstimate> out;
  for (int m = M - 1; m >= 0; --m) {
    const auto xs = layout.sites(m, Quadrature::x);
    const auto ys = layout.sites(m, Quadrature::y);
    int kx = 0, ky = 0;
    for (int s : xs) kx += table.outcome(shot, s);
    for (int s : ys) ky += table.outcome(shot, s);
    const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
    EnsembleEstimate e;
    e.m = m;
    e.fraction = std::ldexp(1.0, -m);
    e.theta_hat = estimate_phase_from_populations(static_cast<double>(kx) / nx,
                                                  static_cast<double>(ky) / ny);
    e.n_x = nx;
    e.n_y = ny;
    e.imbalanced = nx != ny;
    out.push_back(e);
  }
  return out;
}

}  // namespace tzclock
