#pragma once

// Executes a PulseSequence on independent sites that share one laser.
//
// Each site carries its amplitudes plus a drive-frame offset. A move by dx
// adds k*dx to the offset; every later global pulse on that site uses
// drive_phase + frame + theta(t), where theta is the laser phase at the pulse
// centre. This reproduces the single-pulse Z-rotation picture and stays
// correct when several pulses follow a move.

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "tzclock/noise.hpp"
#include "tzclock/qubit.hpp"
#include "tzclock/random.hpp"
#include "tzclock/sequence.hpp"

namespace tzclock {

// Laser phase in radians as a function of sequence time in microseconds.
using LaserPhase = std::function<double(double)>;

struct SimulationSettings {
  DriveParams drive{};
  double detuning_hz = 0.0;
  std::optional<LaserNoiseParams> noise;
  SpamParams spam = SpamParams::perfect();
  // Infidelity of an X(pi), applied as a depolarizing channel scaled with
  // |angle| (so two pi/2 pulses cost the same as one pi pulse).
  double pulse_infidelity = 0.0;
  // Multiplies every commanded displacement (calibration error of the moves).
  double distance_scale = 1.0;

  double depolarizing_probability(double angle) const {
    return 2.0 * pulse_infidelity * std::abs(angle) / pi;
  }
  double readout_depolarizing_probability() const {
    return 2.0 * (1.0 - spam.readout_pulse_fidelity);
  }
  bool noiseless() const {
    return (!noise || noise->beta == 0.0) && spam.is_perfect() && pulse_infidelity == 0.0;
  }
};

struct ShotResult {
  std::vector<QubitState> states;  // before any readout rotation
  std::vector<double> p_excited;   // in each site's measured basis, before SPAM
  std::vector<std::uint8_t> outcomes;
};

namespace detail {

// Runs the sequence. `phase_at` is queried in non-decreasing time order;
// `rng` may be null for an exact, error-free run.
inline ShotResult execute(const PulseSequence& seq, const SimulationSettings& cfg,
                          const LaserPhase& phase_at, Engine* rng) {
  const int n = seq.array_size();
  const auto N = static_cast<std::size_t>(n);
  const double k = cfg.drive.wavevector() * cfg.distance_scale;
  ShotResult out;
  out.states.assign(N, QubitState::ground());
  std::vector<double> frame(N, 0.0);
  const std::vector<Basis>* measure_basis = nullptr;
  double measure_time = seq.total_time_us();

  auto pulse_all = [&](double angle, double drive_phase, double t_center,
                       const std::function<bool(int)>& applies) {
    const double theta = phase_at(t_center);
    const double p_dep = cfg.depolarizing_probability(angle);
    for (int s = 0; s < n; ++s) {
      const auto i = static_cast<std::size_t>(s);
      if (!applies(s)) continue;
      out.states[i] = rotate_global(out.states[i], angle, drive_phase + frame[i] + theta);
      if (rng) out.states[i] = depolarize(out.states[i], p_dep, *rng);
    }
  };
  const auto everyone = [](int) { return true; };

  double t = 0.0;
  for (const auto& ins : seq.instructions()) {
    if (const auto* g = std::get_if<GlobalPulse>(&ins)) {
      pulse_all(g->angle, g->drive_phase, t + 0.5 * g->duration_us, everyone);
    } else if (const auto* sh = std::get_if<LocalShift>(&ins)) {
      for (const auto& [site, dx] : sh->shift_nm) frame[static_cast<std::size_t>(site)] += k * dx;
    } else if (const auto* f = std::get_if<LocalPiFlip>(&ins)) {
      if (f->mode == FlipMode::ideal) {
        pulse_all(pi, 0.0, t + f->center_offset_us(), [f](int s) { return f->contains(s); });
      } else {
        const double half = k * f->half_wave_nm;
        const double p = f->pulse_us;
        pulse_all(pi / 2, 0.0, t + 0.5 * p, everyone);
        for (int s = 0; s < n; ++s)
          if (!f->contains(s)) frame[static_cast<std::size_t>(s)] += half;
        pulse_all(pi / 2, 0.0, t + 1.5 * p + f->shift_time_us + f->pad_us, everyone);
        for (int s = 0; s < n; ++s)
          if (!f->contains(s)) frame[static_cast<std::size_t>(s)] -= half;
      }
    } else if (const auto* m = std::get_if<Measure>(&ins)) {
      measure_basis = &m->basis;
      measure_time = t;
    }
    t += duration_us(ins);
  }

  out.p_excited.resize(N);
  double theta_ro = 0.0;
  bool need_readout_pulse = false;
  if (measure_basis)
    for (Basis b : *measure_basis) need_readout_pulse |= (b != Basis::z);
  if (need_readout_pulse) theta_ro = phase_at(measure_time);
  const double p_ro = cfg.readout_depolarizing_probability();

  for (int s = 0; s < n; ++s) {
    const auto i = static_cast<std::size_t>(s);
    QubitState st = out.states[i];
    const Basis b = measure_basis ? (*measure_basis)[i] : Basis::z;
    if (b != Basis::z) {
      // X basis maps |+X> to |1> with drive phase pi/2, Y basis with phase 0.
      const double phase = (b == Basis::x ? pi / 2 : 0.0) + frame[i] + theta_ro;
      st = rotate_global(st, pi / 2, phase);
      if (rng) st = depolarize(st, p_ro, *rng);
    }
    out.p_excited[i] = std::clamp(st.excited_population(), 0.0, 1.0);
  }
  if (rng) {
    out.outcomes.resize(N);
    for (std::size_t i = 0; i < N; ++i)
      out.outcomes[i] = apply_spam(out.p_excited[i], cfg.spam, *rng) ? 1 : 0;
  }
  return out;
}

// Times at which `execute` queries the laser phase, in query order.
inline std::vector<double> phase_query_times(const PulseSequence& seq) {
  std::vector<double> times;
  SimulationSettings quiet;
  quiet.spam.readout_pulse_fidelity = 1.0;
  execute(seq, quiet, [&](double t) { times.push_back(t); return 0.0; }, nullptr);
  return times;
}

}  // namespace detail

inline LaserPhase detuning_phase(double detuning_hz) {
  return [detuning_hz](double t_us) { return two_pi * detuning_hz * t_us * 1e-6; };
}

// Noise-free populations with an arbitrary laser phase (default: the
// configured detuning). No depolarizing, no readout-pulse error, no SPAM.
inline ShotResult simulate_exact(const PulseSequence& seq, const SimulationSettings& cfg,
                                 const LaserPhase& phase = {}) {
  return detail::execute(seq, cfg, phase ? phase : detuning_phase(cfg.detuning_hz), nullptr);
}

// Laser phase for one shot: detuning plus a noise trajectory sampled at the
// times the sequence queries.
inline LaserPhase shot_laser_phase(const PulseSequence& seq, const SimulationSettings& cfg,
                                   std::uint64_t trajectory_seed) {
  auto base = detuning_phase(cfg.detuning_hz);
  if (!cfg.noise || cfg.noise->beta == 0.0) return base;
  const auto& noise = *cfg.noise;
  auto times = detail::phase_query_times(seq);
  std::vector<double> grid{0.0};
  for (double t : times) grid.push_back(t / noise.time_unit_us);
  auto traj = sample_trajectory(noise, grid, trajectory_seed);
  auto samples = std::make_shared<std::vector<double>>(traj.phases.begin() + 1, traj.phases.end());
  auto cursor = std::make_shared<std::size_t>(0);
  return [base, samples, cursor](double t_us) {
    const double noise_phase = (*samples)[std::min(*cursor, samples->size() - 1)];
    ++*cursor;
    return base(t_us) + noise_phase;
  };
}

struct ShotTable {
  int n_sites = 0;
  int shots = 0;
  std::vector<std::uint8_t> outcomes;  // shot-major
  std::vector<double> p_sum;           // per site, sum of pre-SPAM probabilities

  std::uint8_t outcome(int shot, int site) const {
    return outcomes[static_cast<std::size_t>(shot) * static_cast<std::size_t>(n_sites) +
                    static_cast<std::size_t>(site)];
  }
  int count(int site) const {
    int c = 0;
    for (int s = 0; s < shots; ++s) c += outcome(s, site);
    return c;
  }
  double fraction(int site) const { return static_cast<double>(count(site)) / shots; }
};

// Runs `shots` independent repetitions. Shot j of point p draws its laser
// trajectory from stream (seed, p, j, laser) and its site randomness from
// (seed, p, j, sites), so results do not depend on evaluation order.
inline ShotTable simulate_shots(const PulseSequence& seq, const SimulationSettings& cfg, int shots,
                                std::uint64_t seed, std::uint64_t point_index = 0) {
  if (shots < 1) throw InvalidArgument("simulate_shots: need >= 1 shot");
  ShotTable table;
  table.n_sites = seq.array_size();
  table.shots = shots;
  table.outcomes.reserve(static_cast<std::size_t>(shots) * static_cast<std::size_t>(table.n_sites));
  table.p_sum.assign(static_cast<std::size_t>(table.n_sites), 0.0);
  for (int j = 0; j < shots; ++j) {
    const auto shot = static_cast<std::uint64_t>(j);
    Engine laser_rng = derive_stream(seed, {point_index, shot, static_cast<std::uint64_t>(StreamPurpose::laser)});
    Engine site_rng = derive_stream(seed, {point_index, shot, static_cast<std::uint64_t>(StreamPurpose::sites)});
    const auto phase = shot_laser_phase(seq, cfg, laser_rng());
    auto r = detail::execute(seq, cfg, phase, &site_rng);
    table.outcomes.insert(table.outcomes.end(), r.outcomes.begin(), r.outcomes.end());
    for (std::size_t i = 0; i < r.p_excited.size(); ++i) table.p_sum[i] += r.p_excited[i];
  }
  return table;
}

}  // namespace tzclock
