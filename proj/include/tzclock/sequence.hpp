#pragma once

// Pulse-sequence IR over a 1D atom array and compilers from protocol-level
// descriptions (parity addressing, phase patterns, cardinal states,
// dual-quadrature Ramsey, local dynamical decoupling, kernel schedules).
//
// Times are microseconds, distances nanometres, angles radians.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tzclock/angles.hpp"
#include "tzclock/errors.hpp"
#include "tzclock/qubit.hpp"

namespace tzclock {

enum class Basis { x, y, z };
enum class Quadrature { x, y };
enum class FlipMode { composite, ideal };

inline char to_char(Basis b) { return b == Basis::x ? 'X' : b == Basis::y ? 'Y' : 'Z'; }

struct GlobalPulse {
  double angle = pi / 2;
  double drive_phase = 0.0;
  double duration_us = 0.0;

  bool operator==(const GlobalPulse&) const = default;
};

struct LocalShift {
  std::map<int, double> shift_nm;  // site -> displacement; absent sites stay put
  double shift_time_us = 32.0;

  bool operator==(const LocalShift&) const = default;
};

struct Wait {
  double duration_us = 0.0;

  bool operator==(const Wait&) const = default;
};

// Local X(pi) on `sites`. In composite mode the simulator realises it as
//   X(pi/2) | shift others by +dx | pad | X(pi/2) | shift others by -dx | pad
// with dx = lambda/2, so flipped sites see X(pi) and the others X(pi/2)
// followed by its inverse. Ideal mode applies X(pi) to `sites` at the centre.
struct LocalPiFlip {
  std::vector<int> sites;  // sorted, unique
  FlipMode mode = FlipMode::composite;
  double pulse_us = 0.0;  // duration of one X(pi/2) (composite) or X(pi) (ideal)
  double shift_time_us = 32.0;
  double pad_us = 34.0;
  double half_wave_nm = 349.2;

  double duration_us() const {
    return mode == FlipMode::ideal ? pulse_us : 2.0 * (pulse_us + shift_time_us + pad_us);
  }

  // Effective flip instant measured from the instruction start.
  double center_offset_us() const {
    return mode == FlipMode::ideal ? 0.5 * pulse_us : pulse_us + 0.5 * (shift_time_us + pad_us);
  }

  bool contains(int site) const { return std::binary_search(sites.begin(), sites.end(), site); }

  bool operator==(const LocalPiFlip&) const = default;
};

struct Measure {
  std::vector<Basis> basis;  // one per site

  bool operator==(const Measure&) const = default;
};

using Instruction = std::variant<GlobalPulse, LocalShift, Wait, LocalPiFlip, Measure>;

inline double duration_us(const Instruction& ins) {
  struct Visitor {
    double operator()(const GlobalPulse& p) const { return p.duration_us; }
    double operator()(const LocalShift& s) const { return s.shift_time_us; }
    double operator()(const Wait& w) const { return w.duration_us; }
    double operator()(const LocalPiFlip& f) const { return f.duration_us(); }
    double operator()(const Measure&) const { return 0.0; }
  };
  return std::visit(Visitor{}, ins);
}

class PulseSequence {
 public:
  PulseSequence() = default;
  explicit PulseSequence(int array_size) : array_size_(array_size) {
    if (array_size < 1) throw InvalidArgument("PulseSequence: array_size must be >= 1");
  }

  int array_size() const { return array_size_; }
  const std::vector<Instruction>& instructions() const { return instructions_; }
  bool empty() const { return instructions_.empty(); }

  PulseSequence& append(Instruction ins) {
    instructions_.push_back(std::move(ins));
    return *this;
  }

  double total_time_us() const {
    double t = 0.0;
    for (const auto& ins : instructions_) t += duration_us(ins);
    return t;
  }

  std::vector<double> start_times_us() const {
    std::vector<double> out;
    out.reserve(instructions_.size());
    double t = 0.0;
    for (const auto& ins : instructions_) {
      out.push_back(t);
      t += duration_us(ins);
    }
    return out;
  }

  bool operator==(const PulseSequence&) const = default;

 private:
  int array_size_ = 1;
  std::vector<Instruction> instructions_;
};

struct CompileOptions {
  DriveParams drive{};
  double shift_time_us = 32.0;
  double pad_us = 34.0;
  FlipMode flip_mode = FlipMode::composite;
  double min_shift_time_us = 20.0;

  double half_pi_pulse_us() const { return drive.pulse_duration_us(pi / 2); }
  double pi_pulse_us() const { return drive.pulse_duration_us(pi); }
  double wavelength_nm() const { return drive.wavelength_nm(); }

  // Displacement for `phase`, reduced modulo lambda into (-lambda/2, lambda/2].
  double reduced_shift_nm(double phase) const {
    return wrap_symmetric(drive.shift_for_phase_nm(phase), 0.5 * drive.wavelength_nm());
  }
};

// ---------------------------------------------------------------------------
// Layouts

struct EnsembleLayout {
  std::vector<int> ensemble;           // per site, 0..M-1
  std::vector<Quadrature> quadrature;  // per site

  int n_sites() const { return static_cast<int>(ensemble.size()); }

  int n_ensembles() const {
    return ensemble.empty() ? 0 : *std::max_element(ensemble.begin(), ensemble.end()) + 1;
  }

  std::vector<int> sites(int m, Quadrature q) const {
    std::vector<int> out;
    for (int s = 0; s < n_sites(); ++s) {
      if (ensemble[static_cast<std::size_t>(s)] == m && quadrature[static_cast<std::size_t>(s)] == q)
        out.push_back(s);
    }
    return out;
  }

  std::vector<int> sites(int m) const {
    std::vector<int> out;
    for (int s = 0; s < n_sites(); ++s)
      if (ensemble[static_cast<std::size_t>(s)] == m) out.push_back(s);
    return out;
  }

  void validate() const {
    if (ensemble.size() != quadrature.size() || ensemble.empty())
      throw InvalidArgument("layout: ensemble and quadrature maps must cover the same sites");
    for (int m : ensemble)
      if (m < 0) throw InvalidArgument("layout: negative ensemble index");
    for (int m = 0; m < n_ensembles(); ++m) {
      if (sites(m, Quadrature::x).empty() || sites(m, Quadrature::y).empty())
        throw InvalidArgument("layout: ensemble " + std::to_string(m) +
                              " is missing a quadrature sub-ensemble");
    }
  }

  // Ensemble m occupies a contiguous block of 2n sites, even offsets reading
  // X and odd offsets Y. With M = 1 this is the even/odd split.
  static EnsembleLayout blocks(int n_ensembles, int atoms_per_quadrature) {
    if (n_ensembles < 1 || atoms_per_quadrature < 1)
      throw InvalidArgument("layout: need >= 1 ensemble and >= 1 atom per quadrature");
    EnsembleLayout l;
    for (int m = 0; m < n_ensembles; ++m) {
      for (int i = 0; i < 2 * atoms_per_quadrature; ++i) {
        l.ensemble.push_back(m);
        l.quadrature.push_back(i % 2 == 0 ? Quadrature::x : Quadrature::y);
      }
    }
    return l;
  }
};

struct SensitivitySchedule {
  int n_ensembles = 1;
  int kernels = 1;
  double kernel_us = 0.0;
  double total_us = 0.0;
  // Flip instants for each ensemble as fractions of the total dark time.
  std::vector<std::vector<double>> flip_fractions;
};

// ---------------------------------------------------------------------------
// Timeline helper: places instructions at absolute start times, padding with
// waits. Throws if an instruction would have to start in the past.

namespace detail {

class Timeline {
 public:
  explicit Timeline(int array_size) : seq_(array_size) {}

  double now() const { return now_; }

  void append(Instruction ins) {
    now_ += duration_us(ins);
    seq_.append(std::move(ins));
  }

  void place_at(double start_us, Instruction ins, const char* what) {
    constexpr double slack = 1e-9;
    if (start_us < now_ - slack)
      throw InvalidArgument(std::string("dark time too short to place ") + what);
    if (start_us > now_) append(Wait{start_us - now_});
    now_ = std::max(now_, start_us);
    append(std::move(ins));
  }

  PulseSequence take() { return std::move(seq_); }

 private:
  PulseSequence seq_;
  double now_ = 0.0;
};

inline GlobalPulse half_pi(const CompileOptions& o, double phase = 0.0) {
  return {pi / 2, phase, o.half_pi_pulse_us()};
}

inline Measure measure_all(int n, Basis b = Basis::z) { return {std::vector<Basis>(static_cast<std::size_t>(n), b)}; }

// Shift block (LocalShift then jitter pad); empty map emits nothing.
inline void append_shift(Timeline& tl, std::map<int, double> shifts, const CompileOptions& o) {
  if (shifts.empty()) return;
  tl.append(LocalShift{std::move(shifts), o.shift_time_us});
  if (o.pad_us > 0.0) tl.append(Wait{o.pad_us});
}

inline double shift_block_us(const CompileOptions& o) { return o.shift_time_us + o.pad_us; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Protocol builders

// X(pi/2) | shift odd sites by dx | X(pi/2) | measure Z.
inline PulseSequence build_parity_addressing(int n_sites, double delta_x_nm,
                                             const CompileOptions& o = {}) {
  if (n_sites < 2) throw InvalidArgument("build_parity_addressing: need >= 2 sites");
  if (!std::isfinite(delta_x_nm)) throw InvalidArgument("build_parity_addressing: non-finite dx");
  detail::Timeline tl(n_sites);
  tl.append(detail::half_pi(o));
  LocalShift shift{{}, o.shift_time_us};
  for (int s = 1; s < n_sites; s += 2) shift.shift_nm[s] = delta_x_nm;
  tl.append(shift);
  if (o.pad_us > 0.0) tl.append(Wait{o.pad_us});
  tl.append(detail::half_pi(o));
  tl.append(detail::measure_all(n_sites));
  return tl.take();
}

// Ramsey with dark time `dark_time_us` (between pulse centres) and a per-site
// phase pattern imprinted by one parallel shift centred in the dark time.
inline PulseSequence build_phase_pattern(const std::vector<double>& phi_pattern,
                                         double dark_time_us, const CompileOptions& o = {}) {
  if (phi_pattern.empty()) throw InvalidArgument("build_phase_pattern: empty pattern");
  for (double phi : phi_pattern)
    if (!std::isfinite(phi)) throw InvalidArgument("build_phase_pattern: non-finite phase");
  const int n = static_cast<int>(phi_pattern.size());
  std::map<int, double> shifts;
  for (int s = 0; s < n; ++s) {
    const double dx = o.reduced_shift_nm(phi_pattern[static_cast<std::size_t>(s)]);
    if (dx != 0.0) shifts[s] = dx;
  }
  const double p = o.half_pi_pulse_us();
  detail::Timeline tl(n);
  tl.append(detail::half_pi(o));
  const double first_center = 0.5 * p;
  const double last_center = first_center + dark_time_us;
  if (!shifts.empty()) {
    const double mid = first_center + 0.5 * dark_time_us;
    const double block = detail::shift_block_us(o);
    if (mid - 0.5 * block < p - 1e-9)
      throw InvalidArgument("build_phase_pattern: dark time shorter than the shift block");
    if (mid - 0.5 * block > tl.now()) tl.append(Wait{mid - 0.5 * block - tl.now()});
    detail::append_shift(tl, shifts, o);
  }
  tl.place_at(last_center - 0.5 * p, detail::half_pi(o), "final Ramsey pulse");
  tl.append(detail::measure_all(n));
  return tl.take();
}

// Per-cardinal-state (pre-shift phase a, mid shift phase b) for the two-pulse
// skeleton R(pi/2, a+b) R(pi/2, a)|0>.
inline std::pair<double, double> cardinal_frame_phases(Cardinal c) {
  switch (c) {
    case Cardinal::minus_z: return {0.0, pi};
    case Cardinal::plus_z: return {0.0, 0.0};
    case Cardinal::minus_y: return {pi, pi / 2};
    case Cardinal::plus_y: return {0.0, pi / 2};
    case Cardinal::minus_x: return {-pi / 2, pi / 2};
    case Cardinal::plus_x: return {pi / 2, pi / 2};
  }
  return {0.0, 0.0};
}

// One sequence per cardinal target, in the order -Z, +Z, -Y, +Y, -X, +X; every
// site of the array is prepared in that target. Atoms end on their home
// positions, so the state is expressed in the unshifted drive frame.
inline std::vector<PulseSequence> build_cardinal_states(int n_sites = 6,
                                                        const CompileOptions& o = {}) {
  if (n_sites < 1) throw InvalidArgument("build_cardinal_states: need >= 1 site");
  auto all = [&](double phase) {
    std::map<int, double> m;
    const double dx = o.reduced_shift_nm(phase);
    if (dx != 0.0)
      for (int s = 0; s < n_sites; ++s) m[s] = dx;
    return m;
  };
  std::vector<PulseSequence> out;
  for (Cardinal c : all_cardinals) {
    detail::Timeline tl(n_sites);
    switch (c) {
      case Cardinal::minus_z:
        break;
      case Cardinal::plus_z:
        tl.append(detail::half_pi(o));
        tl.append(detail::half_pi(o));
        break;
      default: {
        const double a = cardinal_frame_phases(c).first;
        detail::append_shift(tl, all(a), o);
        tl.append(detail::half_pi(o));
        detail::append_shift(tl, all(-a), o);
        break;
      }
    }
    out.push_back(tl.take());
  }
  return out;
}

// All six cardinal states in parallel on six sites (site i gets target i of
// the order above): shift a_j | X(pi/2) | shift b_j | X(pi/2) | shift home.
inline PulseSequence build_cardinal_array(const CompileOptions& o = {}) {
  std::map<int, double> pre, mid, home;
  for (int s = 0; s < 6; ++s) {
    const auto [a, b] = cardinal_frame_phases(all_cardinals[static_cast<std::size_t>(s)]);
    if (double dx = o.reduced_shift_nm(a); dx != 0.0) pre[s] = dx;
    if (double dx = o.reduced_shift_nm(b); dx != 0.0) mid[s] = dx;
    if (double dx = o.reduced_shift_nm(-(a + b)); dx != 0.0) home[s] = dx;
  }
  detail::Timeline tl(6);
  detail::append_shift(tl, pre, o);
  tl.append(detail::half_pi(o));
  detail::append_shift(tl, mid, o);
  tl.append(detail::half_pi(o));
  detail::append_shift(tl, home, o);
  return tl.take();
}

namespace detail {

// Readout frame for a site: Y sub-ensembles get the Z(pi/2) offset (drive
// frame -pi/2); an odd number of flips is compensated with an extra pi so the
// readout fringe keeps the orientation of plain Ramsey.
inline double readout_frame(Quadrature q, int flips) {
  double frame = q == Quadrature::y ? -pi / 2 : 0.0;
  if (flips % 2 != 0) frame += pi;
  return frame;
}

// Shared back end for dual-quadrature Ramsey with optional flips.
// `flips` holds (time after the first pulse centre, sites) pairs.
inline PulseSequence build_multi_ensemble(const EnsembleLayout& layout, double dark_time_us,
                                          std::vector<std::pair<double, std::vector<int>>> flips,
                                          const CompileOptions& o) {
  layout.validate();
  if (!(dark_time_us >= 0.0) || !std::isfinite(dark_time_us))
    throw InvalidArgument("dark time must be finite and >= 0");
  const int n = layout.n_sites();
  const double p = o.half_pi_pulse_us();
  const double c0 = 0.5 * p;

  std::vector<int> flip_count(static_cast<std::size_t>(n), 0);
  std::sort(flips.begin(), flips.end());

  Timeline tl(n);
  tl.append(half_pi(o));
  for (auto& [t, sites] : flips) {
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    for (int s : sites) ++flip_count[static_cast<std::size_t>(s)];
    LocalPiFlip f;
    f.sites = sites;
    f.mode = o.flip_mode;
    f.pulse_us = o.flip_mode == FlipMode::ideal ? o.pi_pulse_us() : p;
    f.shift_time_us = o.shift_time_us;
    f.pad_us = o.pad_us;
    f.half_wave_nm = 0.5 * o.wavelength_nm();
    const double start = c0 + t - f.center_offset_us();
    tl.place_at(start, f, "local pi flip");
  }

  std::map<int, double> readout;
  for (int s = 0; s < n; ++s) {
    const double frame = readout_frame(layout.quadrature[static_cast<std::size_t>(s)],
                                       flip_count[static_cast<std::size_t>(s)]);
    if (double dx = o.reduced_shift_nm(frame); dx != 0.0) readout[s] = dx;
  }
  const double final_start = c0 + dark_time_us - 0.5 * p;
  if (!readout.empty()) {
    tl.place_at(final_start - shift_block_us(o), LocalShift{readout, o.shift_time_us},
                "readout shift");
    if (o.pad_us > 0.0) tl.append(Wait{o.pad_us});
  }
  tl.place_at(final_start, half_pi(o), "final Ramsey pulse");
  tl.append(measure_all(n));
  return tl.take();
}

// Within one kernel, ensemble m >= 1 flips once at fraction (1 - 2^-m)/2
// (kernel starting with sign -1) or at 1 minus that (starting with +1).
inline double kernel_flip_fraction(int m) { return 0.5 * (1.0 - std::ldexp(1.0, -m)); }

}  // namespace detail

inline PulseSequence build_dual_quadrature(const EnsembleLayout& layout, double dark_time_us,
                                           const CompileOptions& o = {}) {
  layout.validate();
  if (layout.n_ensembles() != 1)
    throw InvalidArgument("build_dual_quadrature: layout must have exactly one ensemble");
  return detail::build_multi_ensemble(layout, dark_time_us, {}, o);
}

struct CompiledSchedule {
  PulseSequence sequence;
  SensitivitySchedule schedule;
};

// k kernels of length tau; ensemble m nets tau / 2^m of phase per kernel.
// Kernels alternate orientation (counted back from the last one) so the
// sign pattern is continuous across kernel boundaries without extra flips.
inline CompiledSchedule build_kernel_schedule(const EnsembleLayout& layout, int kernels,
                                              double tau_us, const CompileOptions& o = {}) {
  layout.validate();
  const int M = layout.n_ensembles();
  if (M < 2) throw InvalidArgument("build_kernel_schedule: need M >= 2 ensembles");
  if (kernels < 1) throw InvalidArgument("build_kernel_schedule: need k >= 1");
  if (!(tau_us > 0.0) || !std::isfinite(tau_us))
    throw InvalidArgument("build_kernel_schedule: tau must be > 0");

  const double total = kernels * tau_us;
  SensitivitySchedule sched{M, kernels, tau_us, total, std::vector<std::vector<double>>(static_cast<std::size_t>(M))};
  std::map<double, std::vector<int>> by_time;
  for (int i = 0; i < kernels; ++i) {
    const bool starts_negative = (kernels - 1 - i) % 2 == 0;
    for (int m = 1; m < M; ++m) {
      const double f = detail::kernel_flip_fraction(m);
      const double t = (i + (starts_negative ? f : 1.0 - f)) * tau_us;
      auto& bucket = by_time[t];
      for (int s : layout.sites(m)) bucket.push_back(s);
      sched.flip_fractions[static_cast<std::size_t>(m)].push_back(t / total);
    }
  }
  std::vector<std::pair<double, std::vector<int>>> flips(by_time.begin(), by_time.end());
  return {detail::build_multi_ensemble(layout, total, std::move(flips), o), std::move(sched)};
}

// Three-ensemble local DD: flips at T/4 (ensemble 1) and 3T/8 (ensemble 2).
inline PulseSequence build_local_dd(const EnsembleLayout& layout, double total_time_us,
                                    const CompileOptions& o = {}) {
  layout.validate();
  if (layout.n_ensembles() != 3) throw InvalidArgument("build_local_dd: layout must have M = 3");
  if (!(total_time_us > 0.0)) throw InvalidArgument("build_local_dd: T must be > 0");
  return build_kernel_schedule(layout, 1, total_time_us, o).sequence;
}

// ---------------------------------------------------------------------------
// Timing analysis

struct SensitivitySegment {
  double start_us;
  double end_us;
  int sign;
};

// Splits the Ramsey dark time (first to last pi/2 pulse centre) into segments
// of constant sensitivity sign for `site`. The sign is +1 on the last segment
// and flips at every pi rotation reaching the site.
inline std::vector<SensitivitySegment> sensitivity_segments(const PulseSequence& seq, int site) {
  if (site < 0 || site >= seq.array_size()) throw InvalidArgument("sensitivity: site out of range");
  const auto& ins = seq.instructions();
  const auto starts = seq.start_times_us();
  std::vector<std::size_t> pulses;
  for (std::size_t i = 0; i < ins.size(); ++i)
    if (std::holds_alternative<GlobalPulse>(ins[i])) pulses.push_back(i);
  if (pulses.size() < 2) throw AnalysisError("Ramsey skeleton needs two global pulses");

  constexpr double tol = 1e-12;
  auto is_half_pi = [&](std::size_t i) {
    return std::abs(std::get<GlobalPulse>(ins[i]).angle - pi / 2) < tol;
  };
  if (!is_half_pi(pulses.front()) || !is_half_pi(pulses.back()))
    throw AnalysisError("Ramsey skeleton must open and close with pi/2 pulses");

  auto center = [&](std::size_t i) { return starts[i] + 0.5 * duration_us(ins[i]); };
  const double t0 = center(pulses.front());
  const double t1 = center(pulses.back());

  std::vector<double> flip_times;
  for (std::size_t i = pulses.front() + 1; i < pulses.back(); ++i) {
    if (const auto* g = std::get_if<GlobalPulse>(&ins[i])) {
      if (std::abs(std::abs(g->angle) - pi) > tol)
        throw AnalysisError("only pi pulses may appear inside the dark time");
      flip_times.push_back(center(i));
    } else if (const auto* f = std::get_if<LocalPiFlip>(&ins[i])) {
      if (f->contains(site)) flip_times.push_back(starts[i] + f->center_offset_us());
    } else if (std::holds_alternative<Measure>(ins[i])) {
      throw AnalysisError("measurement inside the dark time");
    }
  }
  for (std::size_t i = 0; i < pulses.front(); ++i)
    if (std::holds_alternative<LocalPiFlip>(ins[i])) throw AnalysisError("flip before Ramsey pulse");

  std::vector<SensitivitySegment> out;
  int sign = (flip_times.size() % 2 == 0) ? 1 : -1;
  double prev = t0;
  for (double tf : flip_times) {
    out.push_back({prev, tf, sign});
    sign = -sign;
    prev = tf;
  }
  out.push_back({prev, t1, sign});
  return out;
}

// (1/T) * integral of the sensitivity sign over the dark time.
inline double effective_phase_fraction(const PulseSequence& seq, int site) {
  const auto segs = sensitivity_segments(seq, site);
  const double T = segs.back().end_us - segs.front().start_us;
  if (!(T > 0.0)) throw AnalysisError("effective_phase_fraction: zero dark time");
  double acc = 0.0;
  for (const auto& s : segs) acc += s.sign * (s.end_us - s.start_us);
  return acc / T;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::size_t index;
  std::string message;
};

inline std::vector<Violation> validate(const PulseSequence& seq, double min_shift_time_us = 20.0) {
  std::vector<Violation> out;
  const int n = seq.array_size();
  auto check_site = [&](std::size_t i, int s) {
    if (s < 0 || s >= n)
      out.push_back({i, "site " + std::to_string(s) + " outside array of " + std::to_string(n)});
  };
  bool seen_measure = false;
  const auto& ins = seq.instructions();
  for (std::size_t i = 0; i < ins.size(); ++i) {
    const double d = duration_us(ins[i]);
    if (!(d >= 0.0) || !std::isfinite(d)) out.push_back({i, "negative or non-finite duration"});
    if (std::holds_alternative<Measure>(ins[i])) {
      const auto& m = std::get<Measure>(ins[i]);
      if (static_cast<int>(m.basis.size()) != n)
        out.push_back({i, "measure basis list does not cover the array"});
      seen_measure = true;
      continue;
    }
    if (seen_measure) out.push_back({i, "instruction after measurement"});
    if (const auto* s = std::get_if<LocalShift>(&ins[i])) {
      if (s->shift_time_us < min_shift_time_us)
        out.push_back({i, "shift time " + std::to_string(s->shift_time_us) +
                              " us below minimum " + std::to_string(min_shift_time_us) + " us"});
      for (const auto& [site, dx] : s->shift_nm) {
        check_site(i, site);
        if (!std::isfinite(dx)) out.push_back({i, "non-finite shift distance"});
      }
    } else if (const auto* f = std::get_if<LocalPiFlip>(&ins[i])) {
      for (int site : f->sites) check_site(i, site);
      if (f->mode == FlipMode::composite && f->shift_time_us < min_shift_time_us)
        out.push_back({i, "flip shift time " + std::to_string(f->shift_time_us) +
                              " us below minimum " + std::to_string(min_shift_time_us) + " us"});
    } else if (const auto* g = std::get_if<GlobalPulse>(&ins[i])) {
      if (!std::isfinite(g->angle) || !std::isfinite(g->drive_phase))
        out.push_back({i, "non-finite pulse parameters"});
    }
  }
  return out;
}

}  // namespace tzclock
