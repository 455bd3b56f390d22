#include <gtest/gtest.h>

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "tzclock/qubit.hpp"
#include "tzclock/sequence.hpp"
#include "tzclock/simulator.hpp"

using namespace tzclock;

namespace {

using M2 = Eigen::Matrix2cd;
using V2 = Eigen::Vector2cd;

// Reference unitary built from Pauli matrices.
M2 rotation_matrix(double angle, double phase) {
  M2 sx, sy;
  sx << 0, 1, 1, 0;
  sy << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
  const std::complex<double> i(0, 1);
  return std::cos(angle / 2) * M2::Identity() -
         i * std::sin(angle / 2) * (std::cos(phase) * sx + std::sin(phase) * sy);
}

V2 vec(const QubitState& s) { return V2(s.amp0, s.amp1); }

QubitState random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  V2 v(std::complex<double>(g(rng), g(rng)), std::complex<double>(g(rng), g(rng)));
  v.normalize();
  return {v[0], v[1]};
}

double overlap_sq(const QubitState& a, const QubitState& b) {
  return std::norm(std::conj(a.amp0) * b.amp0 + std::conj(a.amp1) * b.amp1);
}

}  // namespace

TEST(RotateGlobal, MatchesPauliMatrixReference) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_state(rng);
    const double a = u(rng), p = u(rng);
    const V2 expect = rotation_matrix(a, p) * vec(s);
    const auto got = rotate_global(s, a, p);
    EXPECT_NEAR(std::abs(got.amp0 - expect[0]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(got.amp1 - expect[1]), 0.0, 1e-12);
    EXPECT_NEAR(got.norm_squared(), 1.0, 1e-12);
  }
}

TEST(RotateGlobal, BasicPulses) {
  EXPECT_NEAR(rotate_global(QubitState::ground(), pi, 0).excited_population(), 1.0, 1e-15);
  EXPECT_NEAR(rotate_global(QubitState::ground(), pi / 2, 0).excited_population(), 0.5, 1e-15);
  const auto twice = rotate_global(rotate_global(QubitState::ground(), pi / 2, 0), pi / 2, 0);
  EXPECT_NEAR(twice.excited_population(), 1.0, 1e-15);
}

TEST(RotateGlobal, RejectsNonFinite) {
  EXPECT_THROW(rotate_global(QubitState::ground(), std::nan(""), 0), InvalidArgument);
  EXPECT_THROW(rotate_global(QubitState::ground(), 1.0, INFINITY), InvalidArgument);
}

TEST(RotateGlobal, HalfPiCompositionEqualsPiOnPopulations) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_state(rng);
    const double p = std::uniform_real_distribution<double>(-pi, pi)(rng);
    const auto a = rotate_global(rotate_global(s, pi / 2, p), pi / 2, p);
    const auto b = rotate_global(s, pi, p);
    EXPECT_NEAR(a.excited_population(), b.excited_population(), 1e-12);
  }
}

TEST(PhaseShiftFromMove, WavelengthFractions) {
  const DriveParams d;
  EXPECT_NEAR(phase_shift_from_move(349.2, d), pi, 1e-12);
  EXPECT_NEAR(phase_shift_from_move(698.4, d), 2 * pi, 1e-12);
  EXPECT_NEAR(phase_shift_from_move(174.6, d), pi / 2, 1e-12);
  EXPECT_NEAR(d.wavevector() * d.wavelength_nm(), two_pi, 1e-15);
  EXPECT_THROW(DriveParams(-1.0, 2500.0), InvalidArgument);
}

TEST(ApplyLocalPhase, Examples) {
  const double h = std::sqrt(0.5);
  const QubitState plus{h, h};
  const auto flipped = apply_local_phase(plus, pi);
  EXPECT_NEAR(std::abs(flipped.amp0 - std::complex<double>(h)), 0, 1e-15);
  EXPECT_NEAR(std::abs(flipped.amp1 - std::complex<double>(-h)), 0, 1e-15);
  EXPECT_EQ(apply_local_phase(plus, 0.0).amp1, plus.amp1);

  auto s = rotate_global(QubitState::ground(), pi / 2, 0);
  const auto moved = rotate_global(apply_local_phase(s, pi), pi / 2, 0);
  const auto still = rotate_global(s, pi / 2, 0);
  EXPECT_NEAR(moved.excited_population(), 0.0, 1e-15);
  EXPECT_NEAR(still.excited_population(), 1.0, 1e-15);
}

TEST(ApplyLocalPhase, PeriodicAndNormPreserving) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_state(rng);
    const double phi = std::uniform_real_distribution<double>(-20, 20)(rng);
    const auto a = apply_local_phase(s, phi);
    const auto b = apply_local_phase(s, phi + two_pi);
    EXPECT_NEAR(overlap_sq(a, b), 1.0, 1e-12);
    EXPECT_NEAR(a.norm_squared(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(a.excited_population(), s.excited_population());
  }
}

// Moving then pulsing once equals pulsing with the drive phase advanced by k dx.
TEST(GaugeProperty, MoveThenPulseEqualsPhaseAdvancedPulse) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dxd(-2000, 2000), ad(-pi, pi);
  const DriveParams d;
  for (int i = 0; i < 100; ++i) {
    const auto s = random_state(rng);
    const double dx = dxd(rng), angle = ad(rng), phase = ad(rng);
    const double phi = phase_shift_from_move(dx, d);
    const auto local = rotate_global(apply_local_phase(s, phi), angle, phase);
    const auto frame = rotate_global(s, angle, phase + phi);
    EXPECT_NEAR(local.excited_population(), frame.excited_population(), 1e-12);
  }
}

// The move is a frame offset: a second pulse after it still sees the offset,
// which a one-off Z rotation would only reproduce for the first pulse.
TEST(GaugeProperty, FrameOffsetPersistsAcrossPulses) {
  PulseSequence seq(1);
  CompileOptions o;
  const double dx = 100.0;
  seq.append(GlobalPulse{pi / 2, 0, 100});
  seq.append(LocalShift{{{0, dx}}, 32});
  seq.append(GlobalPulse{pi / 3, 0, 66});
  seq.append(GlobalPulse{pi / 4, 0.4, 50});
  seq.append(Measure{{Basis::z}});
  SimulationSettings cfg;
  const double phi = phase_shift_from_move(dx, cfg.drive);
  auto s = rotate_global(QubitState::ground(), pi / 2, 0);
  s = rotate_global(s, pi / 3, phi);
  s = rotate_global(s, pi / 4, 0.4 + phi);
  EXPECT_NEAR(simulate_exact(seq, cfg).p_excited[0], s.excited_population(), 1e-12);
}

TEST(MeasurePopulation, DeterministicCases) {
  EXPECT_EQ(measure_population(QubitState::excited(), 100, 1), 100);
  EXPECT_EQ(measure_population(QubitState::ground(), 100, 1), 0);
  EXPECT_THROW(measure_population(QubitState::ground(), 0, 1), InvalidArgument);
  const auto s = rotate_global(QubitState::ground(), pi / 2, 0);
  EXPECT_EQ(measure_population(s, 1000, 9), measure_population(s, 1000, 9));
}

TEST(MeasurePopulation, BinomialBound) {
  const auto s = rotate_global(QubitState::ground(), pi / 2, 0);
  const double n = 1e6;
  const double frac = measure_population(s, static_cast<std::int64_t>(n), 2024) / n;
  const double five_sigma = 5.0 * std::sqrt(0.25 / n);
  EXPECT_NEAR(frac, 0.5, five_sigma);
}

TEST(Tomography, Examples) {
  auto r = tomography_reconstruct(0.5, 0.5, 1.0);
  EXPECT_NEAR(state_fidelity(r.rho, QubitState::excited()), 1.0, 1e-15);
  r = tomography_reconstruct(0.5, 0.5, 0.5);
  EXPECT_NEAR(r.rho(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(r.rho(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(state_fidelity(r.rho, cardinal_state(Cardinal::plus_y)), 0.5, 1e-15);
  r = tomography_reconstruct(1.0, 0.5, 0.5);
  EXPECT_NEAR(state_fidelity(r.rho, cardinal_state(Cardinal::plus_x)), 1.0, 1e-15);
  EXPECT_THROW(tomography_reconstruct(1.1, 0.5, 0.5), InvalidArgument);
  EXPECT_THROW(tomography_reconstruct(0.5, -0.01, 0.5), InvalidArgument);
}

TEST(Tomography, ProjectsOutsideBlochBall) {
  const auto r = tomography_reconstruct(1.0, 1.0, 0.5);
  EXPECT_TRUE(r.projected);
  EXPECT_NEAR(r.raw_length, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r.bloch.length(), 1.0, 1e-15);
  EXPECT_FALSE(tomography_reconstruct(1.0, 0.5, 0.5).projected);
}

// Populations from basis_populations of a pure state rebuild that state.
TEST(Tomography, RoundTripOnRandomPureStates) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_state(rng);
    const auto p = basis_populations(s);
    const auto r = tomography_reconstruct(p.px, p.py, p.pz);
    EXPECT_NEAR(state_fidelity(r.rho, s), 1.0, 1e-12);
  }
}

TEST(StateFidelity, Validation) {
  DensityMatrix bad;
  bad.m[1] = {0.2, 0.0};
  EXPECT_THROW(state_fidelity(bad, QubitState::ground()), InvalidArgument);
  DensityMatrix trace2;
  trace2.m[0] = 1.5;
  EXPECT_THROW(state_fidelity(trace2, QubitState::ground()), InvalidArgument);
  for (auto c : all_cardinals) {
    const auto psi = cardinal_state(c);
    EXPECT_NEAR(state_fidelity(DensityMatrix::pure(psi), psi), 1.0, 1e-15);
    EXPECT_NEAR(state_fidelity(DensityMatrix{}, psi), 0.5, 1e-15);
  }
}

TEST(Cardinals, AreMutuallyConsistentBlochPoints) {
  const std::map<Cardinal, BlochVector> expect{
      {Cardinal::plus_x, {1, 0, 0}},  {Cardinal::minus_x, {-1, 0, 0}},
      {Cardinal::plus_y, {0, 1, 0}},  {Cardinal::minus_y, {0, -1, 0}},
      {Cardinal::plus_z, {0, 0, 1}},  {Cardinal::minus_z, {0, 0, -1}}};
  for (auto [c, r] : expect) {
    const auto b = bloch_vector(cardinal_state(c));
    EXPECT_NEAR(b.x, r.x, 1e-15) << to_string(c);
    EXPECT_NEAR(b.y, r.y, 1e-15) << to_string(c);
    EXPECT_NEAR(b.z, r.z, 1e-15) << to_string(c);
  }
  // +Y is what X(pi/2) makes from the ground state.
  const auto y = rotate_global(QubitState::ground(), pi / 2, 0);
  EXPECT_NEAR(overlap_sq(y, cardinal_state(Cardinal::plus_y)), 1.0, 1e-15);
}
