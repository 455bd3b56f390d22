#pragma once

// Exact single-qubit evolution for a two-level clock transition driven by a
// global, phase-referenced laser. States are kept as amplitudes so relative
// phases stay exact; Bloch vectors and density matrices are derived views.
//
// Bloch frame: +Z is the excited state |1>, -Z the ground state |0>.
//   |+X> = (|0> + |1>)/sqrt2,  |+Y> = (|0> - i|1>)/sqrt2 = X(pi/2)|0>.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>

#include "tzclock/angles.hpp"
#include "tzclock/errors.hpp"
#include "tzclock/random.hpp"

namespace tzclock {

using Complex = std::complex<double>;

struct QubitState {
  Complex amp0{1.0, 0.0};
  Complex amp1{0.0, 0.0};

  static QubitState ground() { return {}; }
  static QubitState excited() { return {Complex{0.0}, Complex{1.0}}; }

  double excited_population() const { return std::norm(amp1); }
  double ground_population() const { return std::norm(amp0); }
  double norm_squared() const { return std::norm(amp0) + std::norm(amp1); }
};

struct SitePosition {
  double x_nm = 0.0;
  int site_index = 0;
};

class DriveParams {
 public:
  explicit DriveParams(double wavelength_nm = 698.4, double rabi_frequency_hz = 2.5e3)
      : wavelength_nm_(wavelength_nm), rabi_frequency_hz_(rabi_frequency_hz) {
    if (!(wavelength_nm > 0.0) || !std::isfinite(wavelength_nm))
      throw InvalidArgument("drive: wavelength_nm must be positive and finite");
    if (!(rabi_frequency_hz > 0.0) || !std::isfinite(rabi_frequency_hz))
      throw InvalidArgument("drive: rabi_frequency_hz must be positive and finite");
  }

  double wavelength_nm() const { return wavelength_nm_; }
  double rabi_frequency_hz() const { return rabi_frequency_hz_; }
  // radians per nanometre
  double wavevector() const { return two_pi / wavelength_nm_; }

  // Square-pulse duration for a rotation by `angle` (pi pulse = 1/(2*Omega)).
  double pulse_duration_us(double angle) const {
    return std::abs(angle) / (two_pi * rabi_frequency_hz_) * 1e6;
  }

  // Displacement that imprints `phase` radians.
  double shift_for_phase_nm(double phase) const { return phase / wavevector(); }

 private:
  double wavelength_nm_;
  double rabi_frequency_hz_;
};

// cos(a/2) I - i sin(a/2) (cos(p) sx + sin(p) sy)
inline QubitState rotate_global(const QubitState& s, double angle, double drive_phase) {
  if (!std::isfinite(angle) || !std::isfinite(drive_phase))
    throw InvalidArgument("rotate_global: non-finite angle or drive phase");
  const double c = std::cos(0.5 * angle);
  const double sn = std::sin(0.5 * angle);
  const Complex minus_i{0.0, -1.0};
  const Complex e_minus = std::polar(1.0, -drive_phase);
  const Complex e_plus = std::polar(1.0, drive_phase);
  return {c * s.amp0 + minus_i * sn * e_minus * s.amp1,
          minus_i * sn * e_plus * s.amp0 + c * s.amp1};
}

inline double phase_shift_from_move(double delta_x_nm, const DriveParams& drive) {
  return drive.wavevector() * delta_x_nm;
}

// Relative phase e^{-i phi} on the excited amplitude. For a single following
// global pulse this is population-equivalent to advancing that pulse's drive
// phase by phi.
inline QubitState apply_local_phase(const QubitState& s, double phi) {
  return {s.amp0, s.amp1 * std::polar(1.0, -phi)};
}

enum class Pauli { x, y, z };

inline QubitState apply_pauli(const QubitState& s, Pauli p) {
  switch (p) {
    case Pauli::x:
      return {s.amp1, s.amp0};
    case Pauli::y:
      return {Complex{0.0, -1.0} * s.amp1, Complex{0.0, 1.0} * s.amp0};
    case Pauli::z:
      return {s.amp0, -s.amp1};
  }
  return s;
}

inline std::int64_t measure_population(const QubitState& s, std::int64_t n_shots,
                                       std::uint64_t rng_seed) {
  if (n_shots < 1) throw InvalidArgument("measure_population: n_shots must be >= 1");
  const double p = std::clamp(s.excited_population(), 0.0, 1.0);
  Engine rng = derive_stream(rng_seed, {0});
  return std::binomial_distribution<std::int64_t>(n_shots, p)(rng);
}

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double length() const { return std::sqrt(x * x + y * y + z * z); }
};

// Excited-state probability after mapping each basis' + state onto |1>.
struct BasisPopulations {
  double px = 0.5;
  double py = 0.5;
  double pz = 0.5;
};

inline BlochVector bloch_vector(const QubitState& s) {
  const Complex coherence = s.amp0 * std::conj(s.amp1);  // rho_01
  return {2.0 * coherence.real(), 2.0 * coherence.imag(),
          std::norm(s.amp1) - std::norm(s.amp0)};
}

inline BasisPopulations basis_populations(const QubitState& s) {
  const auto r = bloch_vector(s);
  return {0.5 * (1.0 + r.x), 0.5 * (1.0 + r.y), 0.5 * (1.0 + r.z)};
}

// 2x2 density matrix in the (|0>, |1>) basis, row-major.
struct DensityMatrix {
  std::array<Complex, 4> m{Complex{0.5}, Complex{0.0}, Complex{0.0}, Complex{0.5}};

  Complex operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }
  Complex trace() const { return m[0] + m[3]; }

  bool is_hermitian(double tol) const {
    return std::abs(m[0].imag()) <= tol && std::abs(m[3].imag()) <= tol &&
           std::abs(m[1] - std::conj(m[2])) <= tol;
  }

  static DensityMatrix from_bloch(const BlochVector& r) {
    DensityMatrix d;
    d.m = {Complex{0.5 * (1.0 - r.z)}, Complex{0.5 * r.x, 0.5 * r.y},
           Complex{0.5 * r.x, -0.5 * r.y}, Complex{0.5 * (1.0 + r.z)}};
    return d;
  }

  static DensityMatrix pure(const QubitState& s) {
    DensityMatrix d;
    d.m = {s.amp0 * std::conj(s.amp0), s.amp0 * std::conj(s.amp1),
           s.amp1 * std::conj(s.amp0), s.amp1 * std::conj(s.amp1)};
    return d;
  }
};

struct TomographyResult {
  DensityMatrix rho;
  BlochVector bloch;
  // True when the raw Bloch vector was longer than 1 and was rescaled.
  bool projected = false;
  double raw_length = 0.0;
};

inline TomographyResult tomography_reconstruct(double px, double py, double pz) {
  for (double p : {px, py, pz}) {
    if (!(p >= 0.0 && p <= 1.0))
      throw InvalidArgument("tomography_reconstruct: populations must lie in [0, 1]");
  }
  BlochVector r{2.0 * px - 1.0, 2.0 * py - 1.0, 2.0 * pz - 1.0};
  TomographyResult out;
  out.raw_length = r.length();
  if (out.raw_length > 1.0) {
    r = {r.x / out.raw_length, r.y / out.raw_length, r.z / out.raw_length};
    out.projected = true;
  }
  out.bloch = r;
  out.rho = DensityMatrix::from_bloch(r);
  return out;
}

// <psi|rho|psi>
inline double state_fidelity(const DensityMatrix& rho, const QubitState& target) {
  constexpr double tol = 1e-9;
  if (!rho.is_hermitian(tol)) throw InvalidArgument("state_fidelity: rho is not Hermitian");
  if (std::abs(rho.trace() - Complex{1.0}) > tol)
    throw InvalidArgument("state_fidelity: rho must have unit trace");
  const Complex a0 = target.amp0, a1 = target.amp1;
  const Complex f = std::conj(a0) * (rho(0, 0) * a0 + rho(0, 1) * a1) +
                    std::conj(a1) * (rho(1, 0) * a0 + rho(1, 1) * a1);
  return std::clamp(f.real(), 0.0, 1.0);
}

enum class Cardinal { minus_z, plus_z, minus_y, plus_y, minus_x, plus_x };

inline constexpr std::array<Cardinal, 6> all_cardinals{Cardinal::minus_z, Cardinal::plus_z,
                                                       Cardinal::minus_y, Cardinal::plus_y,
                                                       Cardinal::minus_x, Cardinal::plus_x};

inline QubitState cardinal_state(Cardinal c) {
  const double h = std::sqrt(0.5);
  switch (c) {
    case Cardinal::minus_z:
      return QubitState::ground();
    case Cardinal::plus_z:
      return QubitState::excited();
    case Cardinal::plus_x:
      return {Complex{h}, Complex{h}};
    case Cardinal::minus_x:
      return {Complex{h}, Complex{-h}};
    case Cardinal::plus_y:
      return {Complex{h}, Complex{0.0, -h}};
    case Cardinal::minus_y:
      return {Complex{h}, Complex{0.0, h}};
  }
  return {};
}

inline std::string to_string(Cardinal c) {
  switch (c) {
    case Cardinal::minus_z: return "-Z";
    case Cardinal::plus_z: return "+Z";
    case Cardinal::minus_y: return "-Y";
    case Cardinal::plus_y: return "+Y";
    case Cardinal::minus_x: return "-X";
    case Cardinal::plus_x: return "+X";
  }
  return "?";
}

}  // namespace tzclock
