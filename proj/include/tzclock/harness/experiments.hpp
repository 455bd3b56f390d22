#pragma once

// run(config): builds the sequences for every grid point, simulates them
// (grid points in parallel, each from its own random streams), runs the
// estimation pipeline and fills a ResultTable plus a Report.
//
// Random streams: shot j of grid point p uses (seed, p, j, laser|sites); the
// cardinal-tomography bases are points 0, 1, 2 (X, Y, Z). Analysis draws use
// (seed, analysis). Output therefore does not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "tzclock/estimation.hpp"
#include "tzclock/harness/config.hpp"
#include "tzclock/harness/report.hpp"
#include "tzclock/harness/result_table.hpp"
#include "tzclock/least_squares.hpp"
#include "tzclock/multi_ensemble.hpp"
#include "tzclock/phase_inversion.hpp"
#include "tzclock/qubit.hpp"
#include "tzclock/sequence.hpp"
#include "tzclock/simulator.hpp"

namespace tzclock::harness {

struct RunOutput {
  ResultTable table;
  Report report;
};

namespace detail {

inline unsigned worker_count(std::size_t jobs) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(jobs, 1)));
}

// f(i) for i in [0, n), results in index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& f) {
  std::vector<T> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned k = worker_count(n);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < k; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

// Builds one sequence per grid point; bad points are collected into one
// ConfigError.
inline std::vector<PulseSequence> build_all(const std::vector<double>& grid,
                                            const std::function<PulseSequence(double)>& build,
                                            const std::string& unit) {
  std::vector<PulseSequence> seqs;
  std::vector<std::string> problems;
  for (double x : grid) {
    try {
      seqs.push_back(build(x));
    } catch (const std::invalid_argument& e) {
      problems.push_back("grid point " + num(x) + " " + unit + ": " + e.what());
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  return seqs;
}

inline std::vector<ShotTable> simulate_grid(const std::vector<PulseSequence>& seqs, const ExperimentConfig& c) {
  return parallel_map<ShotTable>(seqs.size(), [&](std::size_t i) {
    return simulate_shots(seqs[i], c.sim, c.shots_per_point, c.seed, i);
  });
}

struct SinusoidFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double period = 0.0;
  double period_stderr = 0.0;
  double phase = 0.0;  // y = offset + amplitude cos(2 pi x / period + phase)
};

// Linear least squares of y on (1, cos wx, sin wx).
inline Eigen::Vector3d harmonic_lsq(const std::vector<double>& x, const std::vector<double>& y, double w,
                                    double* sse = nullptr) {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(x.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    A(r, 0) = 1.0;
    A(r, 1) = std::cos(w * x[i]);
    A(r, 2) = std::sin(w * x[i]);
    b[r] = y[i];
  }
  Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
  if (sse) *sse = (A * c - b).squaredNorm();
  return c;
}

inline SinusoidFit fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 5) throw InsufficientDataError("sinusoid fit: need >= 5 points");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) throw FitError("sinusoid fit: x values are all equal");
  double min_step = span;
  std::vector<double> xs = x;
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] > xs[i - 1]) min_step = std::min(min_step, xs[i] - xs[i - 1]);

  // Coarse periodogram, then a 4-parameter refinement.
  const double p_min = 2.0 * min_step, p_max = 2.0 * span;
  double best_p = p_max, best_sse = std::numeric_limits<double>::infinity();
  const int n_scan = 4000;
  for (int i = 0; i < n_scan; ++i) {
    const double p = p_min * std::pow(p_max / p_min, static_cast<double>(i) / (n_scan - 1));
    double sse = 0.0;
    harmonic_lsq(x, y, two_pi / p, &sse);
    if (sse < best_sse) best_sse = sse, best_p = p;
  }
  const Eigen::Vector3d c0 = harmonic_lsq(x, y, two_pi / best_p);
  auto residual = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double w = two_pi / v[3];
      r[static_cast<Eigen::Index>(i)] = v[0] + v[1] * std::cos(w * x[i]) + v[2] * std::sin(w * x[i]) - y[i];
    }
    return r;
  };
  Eigen::VectorXd v0(4);
  v0 << c0[0], c0[1], c0[2], best_p;
  SinusoidFit out;
  if (best_sse == 0.0) {
    out.period = best_p;
  } else {
    const auto fit = levenberg_marquardt(residual, v0);
    v0 = fit.params;
    out.period_stderr = std::sqrt(std::max(fit.covariance(3, 3), 0.0));
  }
  out.offset = v0[0];
  out.amplitude = std::hypot(v0[1], v0[2]);
  out.period = v0[3];
  out.phase = std::atan2(-v0[2], v0[1]);
  return out;
}

inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i], sxx += x[i] * x[i], sxy += x[i] * y[i];
  const double d = n * sxx - sx * sx;
  if (x.size() < 2 || d == 0.0) throw FitError("slope fit: need two distinct x values");
  return (n * sxy - sx * sy) / d;
}

inline double phase_stderr(double px, double py, std::int64_t nx, std::int64_t ny) {
  const double zx = 2 * px - 1, zy = 2 * py - 1;
  const double r2 = zx * zx + zy * zy;
  if (r2 == 0.0) return pi;
  const double vx = 4 * px * (1 - px) / static_cast<double>(nx);
  const double vy = 4 * py * (1 - py) / static_cast<double>(ny);
  return std::sqrt((zy * zy * vx + zx * zx * vy)) / r2;
}

inline std::int64_t pooled_count(const ShotTable& t, const std::vector<int>& sites) {
  std::int64_t k = 0;
  for (int s : sites) k += t.count(s);
  return k;
}

// ---------------------------------------------------------------------------

inline void run_parity(const ExperimentConfig& c, RunOutput& out) {
  const std::string ex = to_string(c.kind);
  const auto seqs = build_all(c.grid.values, [&](double dx) { return build_parity_addressing(c.sites, dx, c.compile); }, "nm");
  const auto tables = simulate_grid(seqs, c);
  std::vector<int> odd, even;
  for (int s = 0; s < c.sites; ++s) (s % 2 ? odd : even).push_back(s);
  std::vector<double> shifted, statics;
  double exact_min = 1.0, exact_max = 0.0;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const double dx = c.grid.values[i];
    const std::int64_t n_odd = static_cast<std::int64_t>(c.shots_per_point) * static_cast<std::int64_t>(odd.size());
    const std::int64_t n_even = static_cast<std::int64_t>(c.shots_per_point) * static_cast<std::int64_t>(even.size());
    out.table.add_population(ex, "population", dx, "shifted", pooled_count(tables[i], odd), n_odd);
    out.table.add_population(ex, "population", dx, "static", pooled_count(tables[i], even), n_even);
    shifted.push_back(out.table.rows[out.table.rows.size() - 2].mean);
    statics.push_back(out.table.rows.back().mean);
    for (int s : even) {
      const double p = tables[i].p_sum[static_cast<std::size_t>(s)] / c.shots_per_point;
      exact_min = std::min(exact_min, p);
      exact_max = std::max(exact_max, p);
    }
  }
  auto& r = out.report;
  r.set("static.exact_population_spread", exact_max - exact_min);
  try {
    const auto fit = fit_sinusoid(c.grid.values, shifted);
    r.set("fit.period_nm", fit.period);
    r.set("fit.period_stderr_nm", fit.period_stderr);
    r.set("fit.period_relative_to_wavelength", fit.period / c.compile.wavelength_nm() - 1.0);
    r.set("fit.amplitude", fit.amplitude);
    r.set("fit.offset", fit.offset);
    // Crosstalk: amplitude of the static series at the shifted-site period.
    const auto h = harmonic_lsq(c.grid.values, statics, two_pi / fit.period);
    r.set("crosstalk.amplitude", std::hypot(h[1], h[2]));
  } catch (const std::exception& e) {
    r.warnings.push_back(std::string("period fit: ") + e.what());
  }
}

inline std::vector<double> pattern_phases(const ExperimentConfig& c) {
  if (c.protocol.pattern == "explicit") return c.protocol.pattern_values;
  std::vector<double> phi(static_cast<std::size_t>(c.sites));
  for (int s = 0; s < c.sites; ++s)
    phi[static_cast<std::size_t>(s)] = c.protocol.pattern == "staircase" ? wrap_to_pi(two_pi * s / c.sites)
                                                                          : (s % 2 ? pi : 0.0);
  return phi;
}

inline void run_phase_pattern(const ExperimentConfig& c, RunOutput& out) {
  const std::string ex = to_string(c.kind);
  const auto phi = pattern_phases(c);
  const auto seqs = build_all(c.grid.values, [&](double T) { return build_phase_pattern(phi, T, c.compile); }, "us");
  const auto tables = simulate_grid(seqs, c);
  const int n = static_cast<int>(phi.size());
  std::vector<std::vector<double>> pops(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < tables.size(); ++i) {
    for (int s = 0; s < n; ++s) {
      out.table.add_population(ex, "population", c.grid.values[i], "site:" + std::to_string(s), tables[i].count(s),
                               c.shots_per_point);
      pops[static_cast<std::size_t>(s)].push_back(out.table.rows.back().mean);
    }
  }
  // Fringe phase per site at the known detuning; the pattern is read back
  // relative to site 0.
  auto& r = out.report;
  r.set("pattern.sites", n);
  if (c.grid.values.size() < 3) {
    r.warnings.push_back("fringe phases: need >= 3 dark times");
    return;
  }
  const double w = two_pi * c.sim.detuning_hz * 1e-6;
  std::vector<double> psi;
  for (int s = 0; s < n; ++s) {
    const auto h = harmonic_lsq(c.grid.values, pops[static_cast<std::size_t>(s)], w);
    // P = (1 + cos(wT + phi)) / 2
    psi.push_back(std::atan2(-h[2], h[1]));
  }
  double worst = 0.0;
  for (int s = 0; s < n; ++s) {
    const double measured = wrap_to_pi(psi[static_cast<std::size_t>(s)] - psi[0]);
    const double commanded = wrap_to_pi(phi[static_cast<std::size_t>(s)] - phi[0]);
    r.set("pattern.commanded_rad.site" + std::to_string(s), commanded);
    r.set("pattern.measured_rad.site" + std::to_string(s), measured);
    worst = std::max(worst, std::abs(wrap_to_pi(measured - commanded)));
    out.table.add({ex, "fringe_phase", 0.0, "site:" + std::to_string(s), measured, 0.0,
                   static_cast<std::int64_t>(c.grid.values.size())});
  }
  r.set("pattern.max_abs_error_rad", worst);
}

inline void run_cardinal(const ExperimentConfig& c, RunOutput& out) {
  const std::string ex = to_string(c.kind);
  const PulseSequence base = build_cardinal_array(c.compile);
  std::vector<PulseSequence> seqs;
  for (Basis b : {Basis::x, Basis::y, Basis::z}) {
    PulseSequence s = base;
    s.append(Measure{std::vector<Basis>(6, b)});
    seqs.push_back(std::move(s));
  }
  const auto tables = simulate_grid(seqs, c);
  const char* names[3] = {"p_x", "p_y", "p_z"};
  auto& r = out.report;
  double sum_f = 0.0, sum_fc = 0.0;
  for (int s = 0; s < 6; ++s) {
    const Cardinal target = all_cardinals[static_cast<std::size_t>(s)];
    const std::string label = to_string(target);
    double p[3], se[3], pc[3];
    for (int b = 0; b < 3; ++b) {
      out.table.add_population(ex, names[b], s, label, tables[static_cast<std::size_t>(b)].count(s), c.shots_per_point);
      p[b] = out.table.rows.back().mean;
      se[b] = out.table.rows.back().stderr_;
      pc[b] = c.spam_enabled ? c.sim.spam.corrected_fraction(p[b]) : p[b];
    }
    const auto tomo = tomography_reconstruct(p[0], p[1], p[2]);
    const auto tomo_c = tomography_reconstruct(pc[0], pc[1], pc[2]);
    const double f = state_fidelity(tomo.rho, cardinal_state(target));
    const double fc = state_fidelity(tomo_c.rho, cardinal_state(target));
    // Every target lies on one axis, so F is that axis' population.
    const int axis = (target == Cardinal::minus_x || target == Cardinal::plus_x)   ? 0
                     : (target == Cardinal::minus_y || target == Cardinal::plus_y) ? 1
                                                                                   : 2;
    out.table.add({ex, "fidelity", static_cast<double>(s), label, f, se[axis], c.shots_per_point});
    out.table.add({ex, "fidelity_spam_corrected", static_cast<double>(s), label, fc, se[axis], c.shots_per_point});
    r.set("fidelity." + label, f);
    r.set("fidelity_spam_corrected." + label, fc);
    sum_f += f;
    sum_fc += fc;
  }
  r.set("fidelity.mean", sum_f / 6.0);
  r.set("fidelity_spam_corrected.mean", sum_fc / 6.0);
}

inline double dual_gain_db(const PhaseFit& fit, double dual_half_range, double epsilon = 1e-3) {
  return 5.0 * std::log10(t_max(epsilon, fit, dual_half_range) / t_max(epsilon, fit, pi / 2));
}

inline void run_dual(const ExperimentConfig& c, RunOutput& out) {
  const std::string ex = to_string(c.kind);
  const auto layout = c.layout();
  const auto xs = layout.sites(0, Quadrature::x), ys = layout.sites(0, Quadrature::y);
  const auto seqs = build_all(c.grid.values, [&](double T) { return build_dual_quadrature(layout, T, c.compile); }, "us");
  const auto tables = simulate_grid(seqs, c);
  const double unit = c.noise.time_unit_us;
  const int N = c.atoms_per_quadrature;

  std::vector<ShotRecord> records;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const double T = c.grid.values[i];
    const auto& tb = tables[i];
    std::int64_t kx_all = 0, ky_all = 0;
    for (int j = 0; j < tb.shots; ++j) {
      int kx = 0, ky = 0;
      for (int s : xs) kx += tb.outcome(j, s);
      for (int s : ys) ky += tb.outcome(j, s);
      kx_all += kx;
      ky_all += ky;
      records.push_back({T / unit, static_cast<double>(kx) / N, static_cast<double>(ky) / N, N, N});
    }
    const std::int64_t n = static_cast<std::int64_t>(tb.shots) * N;
    out.table.add_population(ex, "population", T, "X", kx_all, n);
    out.table.add_population(ex, "population", T, "Y", ky_all, n);
  }

  auto& r = out.report;
  const double sigma_qpn =
      c.protocol.sigma_qpn ? *c.protocol.sigma_qpn
                           : qpn_sigma_oracle(N, 1.0, 20000, derive_stream(c.seed, {static_cast<std::uint64_t>(StreamPurpose::analysis)})());
  r.set("analysis.sigma_qpn", sigma_qpn);
  r.set("analysis.time_unit_us", unit);

  PhaseNoiseAnalysis a;
  try {
    a = analyze_phase_noise(records, sigma_qpn, pi);
  } catch (const std::exception& e) {
    r.warnings.push_back(std::string("phase analysis: ") + e.what());
    return;
  }
  for (const auto& w : a.warnings) r.warnings.push_back(w);
  r.set("mean_curve.amplitude", a.mean.amplitude);
  r.set("mean_curve.tau_c", a.mean.tau_c);
  r.set("mean_curve.shape", a.mean.shape);
  r.set("mean_curve.frequency", a.mean.frequency);
  r.set("mean_curve.phase0", a.mean.phase0);

  const int bins = c.protocol.histogram_bins;
  const double width = two_pi / bins;
  for (const auto& p : a.points) {
    const double T = p.t * unit;
    out.table.add({ex, "theta_mean", T, "", p.theta_mean, 0.0, static_cast<std::int64_t>(p.deviations.size())});
    const auto n = static_cast<std::int64_t>(p.deviations.size());
    if (p.fit.n > 0) {
      out.table.add({ex, "sigma", T, "folded", p.fit.sigma, p.fit.stderr_, n});
      out.table.add({ex, "sigma", T, "laser", p.laser.sigma, 0.0, n});
    }
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (double d : p.deviations) {
      const int b = std::clamp(static_cast<int>(std::floor((d + pi) / width)), 0, bins - 1);
      ++counts[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < bins; ++b) {
      const double lo = -pi + b * width;
      const auto k = counts[static_cast<std::size_t>(b)];
      const double dn = static_cast<double>(std::max<std::int64_t>(n, 1));
      out.table.add({ex, "deviation_hist", T, num(lo) + ":" + num(lo + width), k / (dn * width),
                     std::sqrt(static_cast<double>(k)) / (dn * width), k});
    }
    if (p.undefined_shots > 0)
      r.warnings.push_back("t=" + num(T) + " us: " + std::to_string(p.undefined_shots) + " shots had an undefined phase");
  }

  if (!a.growth) return;
  const PhaseFit& fit = *a.growth;
  r.set("fit.beta", fit.beta);
  r.set("fit.beta_stderr", fit.beta_stderr());
  r.set("fit.alpha", fit.alpha);
  r.set("fit.alpha_stderr", fit.alpha_stderr());
  r.set("fit.alpha_identifiable", fit.alpha_identifiable);
  r.set("fit.chi2", fit.chi2);
  if (!(fit.beta > 0.0 && fit.alpha > 0.0)) {
    r.warnings.push_back("sigma growth fit: no laser noise resolved; T_max and gain not reported");
    return;
  }
  try {
    r.set("gain_db", dual_gain_db(fit, pi));
    r.set("gain_db.from_alpha", metrological_gain_db(fit.alpha));
    r.set("gain_db.injected_alpha", metrological_gain_db(c.noise.effective_alpha()));
    for (double eps : c.protocol.epsilons) {
      const double a2 = t_max(eps, fit, pi / 2), a1 = t_max(eps, fit, pi);
      out.table.add({ex, "t_max", eps, "B=pi/2", a2 * unit, 0.0, 0});
      out.table.add({ex, "t_max", eps, "B=pi", a1 * unit, 0.0, 0});
      r.set("t_max_us.B=pi.eps=" + num(eps), a1 * unit);
      r.set("t_max_us.B=pi/2.eps=" + num(eps), a2 * unit);
    }
    r.set("t_max_ratio", t_max(1e-3, fit, pi) / t_max(1e-3, fit, pi / 2));
    for (double T : c.grid.values) {
      const double s = fit.total_sigma(T / unit);
      out.table.add({ex, "slip_probability", T, "B=pi/2", phase_slip_probability(s, pi / 2), 0.0, 0});
      out.table.add({ex, "slip_probability", T, "B=pi", phase_slip_probability(s, pi), 0.0, 0});
    }
  } catch (const std::exception& e) {
    r.warnings.push_back(std::string("T_max: ") + e.what());
  }
}

// local-dd and kernel-schedule: per-ensemble fringe rates from a dark-time
// sweep under constant detuning.
inline void run_ladder(const ExperimentConfig& c, RunOutput& out) {
  const std::string ex = to_string(c.kind);
  const auto layout = c.layout();
  const int M = layout.n_ensembles();
  std::vector<SensitivitySchedule> schedules;
  const auto seqs = build_all(c.grid.values, [&](double T) {
    if (c.kind == ExperimentKind::local_dd) return build_local_dd(layout, T, c.compile);
    auto cs = build_kernel_schedule(layout, c.protocol.kernels, T / c.protocol.kernels, c.compile);
    schedules.push_back(cs.schedule);
    return std::move(cs.sequence);
  }, "us");
  const auto tables = simulate_grid(seqs, c);
  auto& r = out.report;

  for (int m = 0; m < M; ++m) {
    const int site = layout.sites(m).front();
    r.set("effective_phase_fraction.m" + std::to_string(m), effective_phase_fraction(seqs.front(), site));
  }
  if (!schedules.empty()) {
    for (int m = 1; m < M; ++m) {
      std::string f;
      for (double x : schedules.front().flip_fractions[static_cast<std::size_t>(m)]) f += (f.empty() ? "" : ",") + num(x);
      r.set("schedule.flip_fractions.m" + std::to_string(m), f);
    }
  }

  std::vector<std::vector<double>> phase(static_cast<std::size_t>(M));
  bool coarse = false;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const double T = c.grid.values[i];
    for (int m = M - 1; m >= 0; --m) {
      const auto xs = layout.sites(m, Quadrature::x), ys = layout.sites(m, Quadrature::y);
      const std::int64_t nx = static_cast<std::int64_t>(tables[i].shots) * static_cast<std::int64_t>(xs.size());
      const std::int64_t ny = static_cast<std::int64_t>(tables[i].shots) * static_cast<std::int64_t>(ys.size());
      const std::string tag = "m=" + std::to_string(m);
      out.table.add_population(ex, "population", T, tag + ":X", pooled_count(tables[i], xs), nx);
      const double px = out.table.rows.back().mean;
      out.table.add_population(ex, "population", T, tag + ":Y", pooled_count(tables[i], ys), ny);
      const double py = out.table.rows.back().mean;
      auto& v = phase[static_cast<std::size_t>(m)];
      double th = 0.0;
      try {
        th = estimate_phase_from_populations(px, py);
      } catch (const UndefinedPhaseError&) {
        th = v.empty() ? 0.0 : v.back();
      }
      if (!v.empty()) {
        const double step = wrap_to_pi(th - v.back());
        if (std::abs(step) > pi / 2) coarse = true;
        th = v.back() + step;
      }
      v.push_back(th);
      out.table.add({ex, "phase", T, tag, th, phase_stderr(px, py, nx, ny), nx + ny});
    }
  }
  if (coarse) r.warnings.push_back("phase unwrap: a step between neighbouring dark times exceeded pi/2; refine the grid");
  try {
    std::vector<double> rate;
    for (int m = 0; m < M; ++m) {
      const double s = slope(c.grid.values, phase[static_cast<std::size_t>(m)]);
      rate.push_back(s);
      r.set("fringe_frequency_hz.m" + std::to_string(m), s / two_pi * 1e6);
    }
    for (int m = 0; m < M; ++m) r.set("frequency_ratio.m" + std::to_string(m), rate[0] / rate[static_cast<std::size_t>(m)]);
  } catch (const std::exception& e) {
    r.warnings.push_back(std::string("fringe rate fit: ") + e.what());
  }
}

inline void run_slip(const ExperimentConfig& c, RunOutput& out) {
  const std::string ex = to_string(c.kind);
  const auto& o = c.protocol;
  auto& r = out.report;
  const std::uint64_t analysis_seed = derive_stream(c.seed, {static_cast<std::uint64_t>(StreamPurpose::analysis)})();
  std::map<int, std::vector<double>> stage_sigma;
  for (int M : o.ensembles) {
    stage_sigma[M] = o.stage_sigma ? std::vector<double>(static_cast<std::size_t>(M), *o.stage_sigma)
                                   : qpn_stage_sigmas(std::vector<int>(static_cast<std::size_t>(M), o.slip_atoms_per_quadrature),
                                                      analysis_seed);
    r.set("stage_sigma.M=" + std::to_string(M), stage_sigma[M].front());
    r.set("ideal_stability_gain.M=" + std::to_string(M), ideal_stability_gain(M));
  }
  struct PointResult {
    std::vector<SlipEstimate> per_m;
  };
  const auto results = parallel_map<PointResult>(c.grid.values.size(), [&](std::size_t i) {
    const std::uint64_t point_seed = derive_stream(c.seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(StreamPurpose::trials)})();
    PointResult pr;
    for (int M : o.ensembles)
      pr.per_m.push_back(slip_probability_multi(c.grid.values[i], M, stage_sigma.at(M), c.shots_per_point, point_seed));
    return pr;
  });
  double worst_z = 0.0;
  bool m1 = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const double s = c.grid.values[i];
    for (std::size_t k = 0; k < o.ensembles.size(); ++k) {
      const auto& e = results[i].per_m[k];
      out.table.add({ex, "slip_probability", s, "M=" + std::to_string(o.ensembles[k]), e.probability, e.stderr_, e.trials});
      if (o.ensembles[k] == 1 && stage_sigma.at(1).front() == 0.0) {
        m1 = true;
        const double p = phase_slip_probability(s, pi);
        const double se = std::sqrt(std::max(p * (1 - p), 1e-300) / static_cast<double>(e.trials));
        worst_z = std::max(worst_z, std::abs(e.probability - p) / se);
      }
    }
    out.table.add({ex, "slip_probability_erfc", s, "M=1", phase_slip_probability(s, pi), 0.0, 0});
  }
  if (m1) r.set("m1_max_abs_z_vs_erfc", worst_z);
}

}  // namespace detail

inline RunOutput run(const ExperimentConfig& c) {
  RunOutput out;
  echo_config(c, out.report);
  switch (c.kind) {
    case ExperimentKind::parity_sweep: detail::run_parity(c, out); break;
    case ExperimentKind::phase_pattern: detail::run_phase_pattern(c, out); break;
    case ExperimentKind::cardinal_tomography: detail::run_cardinal(c, out); break;
    case ExperimentKind::dual_quadrature: detail::run_dual(c, out); break;
    case ExperimentKind::local_dd:
    case ExperimentKind::kernel_schedule: detail::run_ladder(c, out); break;
    case ExperimentKind::multi_ensemble_slip: detail::run_slip(c, out); break;
  }
  out.report.set("result.rows", static_cast<std::int64_t>(out.table.rows.size()));
  out.report.set("result.warnings", static_cast<int>(out.report.warnings.size()));
  return out;
}

}  // namespace tzclock::harness
