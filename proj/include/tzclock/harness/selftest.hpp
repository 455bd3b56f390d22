#pragma once

// Invariant suite over every module at reduced sizes. Hooks let tests swap
// in a broken phase estimator or dual-path dynamic range to confirm the
// corresponding check notices.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tzclock/estimation.hpp"
#include "tzclock/harness/experiments.hpp"
#include "tzclock/multi_ensemble.hpp"
#include "tzclock/noise.hpp"
#include "tzclock/phase_inversion.hpp"
#include "tzclock/qubit.hpp"
#include "tzclock/sequence.hpp"
#include "tzclock/sequence_io.hpp"
#include "tzclock/simulator.hpp"

namespace tzclock::harness {

struct SelftestHooks {
  std::function<double(double, double)> estimate_phase = estimate_phase_from_populations;
  double dual_half_range = pi;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestSummary {
  std::vector<CheckResult> checks;

  int failures() const {
    int n = 0;
    for (const auto& c : checks) n += !c.passed;
    return n;
  }
  bool passed() const { return failures() == 0; }
};

namespace detail {

inline CheckResult check(const std::string& name, const std::function<std::string()>& body) {
  try {
    const std::string problem = body();
    return {name, problem.empty(), problem.empty() ? "ok" : problem};
  } catch (const std::exception& e) {
    return {name, false, std::string("threw: ") + e.what()};
  }
}

}  // namespace detail

inline SelftestSummary selftest(const SelftestHooks& hooks = {}) {
  using detail::check;
  SelftestSummary s;
  auto& c = s.checks;

  c.push_back(check("qubit.norm_preserved", [] {
    Engine rng = derive_stream(1, {});
    QubitState q;
    for (int i = 0; i < 2000; ++i) {
      q = rotate_global(q, 10 * uniform01(rng) - 5, 10 * uniform01(rng) - 5);
      q = apply_local_phase(q, 10 * uniform01(rng) - 5);
      if (std::abs(q.norm_squared() - 1.0) > 1e-12) return std::string("norm drifted to ") + detail::num(q.norm_squared());
    }
    return std::string();
  }));

  c.push_back(check("qubit.half_wave_move_flips_outcome", [] {
    const auto moved = rotate_global(apply_local_phase(rotate_global({}, pi / 2, 0), pi), pi / 2, 0);
    const auto still = rotate_global(rotate_global({}, pi / 2, 0), pi / 2, 0);
    if (moved.excited_population() > 1e-12 || still.excited_population() < 1 - 1e-12)
      return std::string("expected populations 0 and 1");
    return std::string();
  }));

  c.push_back(check("estimation.dual_quadrature_inversion", [&] {
    double worst = 0.0;
    for (int i = 0; i < 4001; ++i) {
      const double th = -pi + two_pi * (i + 0.5) / 4001;
      const double est = hooks.estimate_phase(0.5 * (1 + std::cos(th)), 0.5 * (1 + std::sin(th)));
      worst = std::max(worst, std::abs(wrap_to_pi(est - th)));
    }
    return worst > 1e-12 ? "max inversion error " + detail::num(worst) : std::string();
  }));

  c.push_back(check("estimation.single_basis_aliases", [] {
    for (double th : {0.3, 1.0, -0.7, 1.5}) {
      const double a = estimate_phase_single_basis(0.5 * (1 + std::sin(th)));
      const double b = estimate_phase_single_basis(0.5 * (1 + std::sin(pi - th)));
      if (std::abs(a - b) > 1e-12) return std::string("theta and pi - theta read differently");
    }
    return std::string();
  }));

  c.push_back(check("sequence.parity_half_wave", [] {
    const auto p = simulate_exact(build_parity_addressing(6, 349.2), SimulationSettings{}).p_excited;
    for (int s = 0; s < 6; ++s) {
      const double want = s % 2 ? 0.0 : 1.0;
      if (std::abs(p[static_cast<std::size_t>(s)] - want) > 1e-12) return "site " + std::to_string(s) + " off";
    }
    return std::string();
  }));

  c.push_back(check("simulator.crosstalk_bitwise", [] {
    const auto ref = simulate_exact(build_parity_addressing(5, 0.0), SimulationSettings{}).p_excited;
    for (double dx = 0; dx < 1400; dx += 13.7) {
      const auto p = simulate_exact(build_parity_addressing(5, dx), SimulationSettings{}).p_excited;
      for (int s = 0; s < 5; s += 2)
        if (p[static_cast<std::size_t>(s)] != ref[static_cast<std::size_t>(s)]) return "static site moved at dx=" + detail::num(dx);
    }
    return std::string();
  }));

  c.push_back(check("sequence.local_dd_fractions", [] {
    const auto layout = EnsembleLayout::blocks(3, 1);
    const auto seq = build_local_dd(layout, 4000.0);
    for (int m = 0; m < 3; ++m) {
      const double f = effective_phase_fraction(seq, layout.sites(m).front());
      if (std::abs(f - std::ldexp(1.0, -m)) > 1e-12) return "ensemble " + std::to_string(m) + " fraction " + detail::num(f);
    }
    return std::string();
  }));

  c.push_back(check("sequence.kernel_fractions", [] {
    const auto layout = EnsembleLayout::blocks(4, 1);
    CompileOptions o;
    o.flip_mode = FlipMode::ideal;
    const auto cs = build_kernel_schedule(layout, 3, 4000.0, o);
    for (int m = 0; m < 4; ++m) {
      const double f = effective_phase_fraction(cs.sequence, layout.sites(m).front());
      if (std::abs(f - std::ldexp(1.0, -m)) > 1e-9) return "ensemble " + std::to_string(m) + " fraction " + detail::num(f);
    }
    return std::string();
  }));

  c.push_back(check("sequence.serialize_round_trip", [] {
    const auto seq = build_local_dd(EnsembleLayout::blocks(3, 2), 5000.0);
    const auto text = serialize(seq);
    return serialize(parse_sequence(text)) == text ? std::string() : std::string("text changed on round trip");
  }));

  c.push_back(check("estimation.dual_quadrature_gain", [&] {
    PhaseFit fit;
    fit.beta = pi * 0.117;
    fit.alpha = 0.59;
    const double g = detail::dual_gain_db(fit, hooks.dual_half_range);
    const double ratio = t_max(1e-3, fit, hooks.dual_half_range) / t_max(1e-3, fit, pi / 2);
    if (std::abs(g - 2.55) > 0.05) return "gain " + detail::num(g) + " dB, expected 2.55";
    if (std::abs(ratio - 3.24) > 0.02) return "T_max ratio " + detail::num(ratio);
    if (std::abs(g - metrological_gain_db(fit.alpha)) > 1e-9) return std::string("gain disagrees with closed form");
    return std::string();
  }));

  c.push_back(check("estimation.folded_gaussian_recovery", [] {
    Engine rng = derive_stream(7, {});
    std::normal_distribution<double> g(0.0, 0.4 * pi);
    std::vector<double> d;
    for (int i = 0; i < 4000; ++i) d.push_back(wrap_to_pi(g(rng)));
    const double s = fit_folded_gaussian(d, pi).sigma;
    return std::abs(s / (0.4 * pi) - 1) > 0.08 ? "sigma " + detail::num(s) : std::string();
  }));

  c.push_back(check("noise.power_law_marginal", [] {
    LaserNoiseParams p;
    p.beta = 0.5;
    p.alpha = 0.59;
    double ss = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
      const auto tr = sample_trajectory(p, {0.0, 1.0, 4.0}, static_cast<std::uint64_t>(i));
      ss += tr.phases[2] * tr.phases[2];
    }
    const double got = std::sqrt(ss / n), want = p.sigma_at(4.0);
    return std::abs(got / want - 1) > 0.06 ? "spread " + detail::num(got) + " vs " + detail::num(want) : std::string();
  }));

  c.push_back(check("multi.exhaustive_unwrap", [] {
    for (int M = 2; M <= 4; ++M) {
      const double range = std::ldexp(pi, M - 1);
      for (int i = 0; i < 997; ++i) {
        const double th = -range + 2 * range * (i + 0.5) / 997;
        const double got = cascaded_unwrap(ideal_ladder(th, M)).theta_full;
        if (std::abs(got - th) > 1e-9) return "M=" + std::to_string(M) + " theta " + detail::num(th);
      }
    }
    return std::string();
  }));

  c.push_back(check("multi.single_ensemble_slip_matches_erfc", [] {
    const double sigma = 1.3;
    const auto e = slip_probability_multi(sigma, 1, {0.0}, 20000, 11);
    const double p = phase_slip_probability(sigma, pi);
    const double se = std::sqrt(p * (1 - p) / 20000);
    return std::abs(e.probability - p) > 4 * se ? "MC " + detail::num(e.probability) + " vs " + detail::num(p) : std::string();
  }));

  c.push_back(check("harness.reproducible_run", [] {
    const auto cfg = parse_config_text(R"({"experiment":"parity-sweep","seed":5,"shots_per_point":20,
      "array":{"sites":6},"drive":{},"noise":{"beta":0.3,"alpha":0.6},"spam":{"enabled":true},
      "grid":{"start":0,"stop":1396.8,"points":12}})");
    return to_tsv(run(cfg).table) == to_tsv(run(cfg).table) ? std::string() : std::string("outputs differ");
  }));

  c.push_back(check("harness.local_dd_rates", [] {
    const auto cfg = parse_config_text(R"({"experiment":"local-dd","seed":3,"shots_per_point":400,
      "array":{"ensembles":3,"atoms_per_quadrature":4},"drive":{"detuning_hz":10},"noise":{},
      "spam":{"enabled":false},"grid":{"start":4000,"stop":100000,"points":40}})");
    const auto r = run(cfg).report;
    const double r1 = r.number("frequency_ratio.m1"), r2 = r.number("frequency_ratio.m2");
    if (std::abs(r1 / 2 - 1) > 0.03 || std::abs(r2 / 4 - 1) > 0.03)
      return "ratios " + detail::num(r1) + ", " + detail::num(r2);
    return std::string();
  }));

  return s;
}

}  // namespace tzclock::harness
