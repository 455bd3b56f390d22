#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "tzclock/noise.hpp"

using namespace tzclock;

namespace {

double sample_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1));
}

// Ensemble of theta at every grid time over `shots` seeds.
std::vector<std::vector<double>> ensemble(const LaserNoiseParams& p, const std::vector<double>& grid,
                                          int shots) {
  std::vector<std::vector<double>> out(grid.size());
  for (int s = 0; s < shots; ++s) {
    const auto tr = sample_trajectory(p, grid, static_cast<std::uint64_t>(s) + 1000);
    for (std::size_t i = 0; i < grid.size(); ++i) out[i].push_back(tr.phases[i]);
  }
  return out;
}

}  // namespace

TEST(Trajectory, ZeroBetaIsFlat) {
  for (auto kind : {NoiseKind::shot_to_shot_frequency, NoiseKind::random_walk_phase,
                    NoiseKind::power_law_sigma}) {
    LaserNoiseParams p{kind, 0.0, 0.7, 1000.0};
    const auto tr = sample_trajectory(p, {0, 0.5, 1, 2}, 4);
    for (double x : tr.phases) EXPECT_EQ(x, 0.0);
  }
}

TEST(Trajectory, GridValidation) {
  LaserNoiseParams p{NoiseKind::random_walk_phase, 1.0};
  EXPECT_THROW(sample_trajectory(p, {0.1, 0.2}, 1), InvalidArgument);
  EXPECT_THROW(sample_trajectory(p, {0.0, 0.3, 0.2}, 1), InvalidArgument);
  EXPECT_THROW(sample_trajectory(p, {}, 1), InvalidArgument);
  EXPECT_NO_THROW(sample_trajectory(p, {0.0, 0.2, 0.2}, 1));
  LaserNoiseParams bad{NoiseKind::power_law_sigma, 1.0, 2.0};
  EXPECT_THROW(sample_trajectory(bad, {0.0, 1.0}, 1), InvalidArgument);
  bad = {NoiseKind::power_law_sigma, -1.0, 0.5};
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Trajectory, DeterministicAndStartsAtZero) {
  LaserNoiseParams p{NoiseKind::power_law_sigma, 0.4, 0.59};
  const std::vector<double> grid{0, 0.1, 0.5, 1.0, 3.0};
  const auto a = sample_trajectory(p, grid, 77);
  const auto b = sample_trajectory(p, grid, 77);
  const auto c = sample_trajectory(p, grid, 78);
  EXPECT_EQ(a.phases, b.phases);
  EXPECT_NE(a.phases, c.phases);
  EXPECT_EQ(a.phases[0], 0.0);
  EXPECT_EQ(a.seed, 77u);
}

TEST(Trajectory, ShotToShotIsLinearInTime) {
  LaserNoiseParams p{NoiseKind::shot_to_shot_frequency, 0.8};
  const auto tr = sample_trajectory(p, {0, 1, 2, 4}, 5);
  EXPECT_NEAR(tr.phases[2], 2 * tr.phases[1], 1e-12);
  EXPECT_NEAR(tr.phases[3], 4 * tr.phases[1], 1e-12);
}

TEST(Trajectory, ShotToShotSpreadScalesWithTime) {
  const double sigma_f = 0.3;
  LaserNoiseParams p{NoiseKind::shot_to_shot_frequency, sigma_f};
  const std::vector<double> grid{0, 2.5};
  const auto e = ensemble(p, grid, 100000);
  EXPECT_NEAR(sample_std(e[1]) / (sigma_f * 2.5), 1.0, 0.03);
}

TEST(Trajectory, RandomWalkSpreadIsSqrtTime) {
  LaserNoiseParams p{NoiseKind::random_walk_phase, 0.5};
  const std::vector<double> grid{0, 0.25, 1.0, 4.0};
  const auto e = ensemble(p, grid, 40000);
  for (std::size_t i = 1; i < grid.size(); ++i)
    EXPECT_NEAR(sample_std(e[i]) / (0.5 * std::sqrt(grid[i])), 1.0, 0.03);
}

TEST(Trajectory, PowerLawMarginalsAndMonotoneGrowth) {
  LaserNoiseParams p{NoiseKind::power_law_sigma, pi * 0.117, 0.59};
  const std::vector<double> grid{0, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  const int shots = 100000;
  const auto e = ensemble(p, grid, shots);
  double prev = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double s = sample_std(e[i]);
    const double expect = p.beta * std::pow(grid[i], 0.59);
    EXPECT_NEAR(s / expect, 1.0, 0.03) << "t=" << grid[i];
    EXPECT_GE(s + 2.0 * s / std::sqrt(2.0 * shots), prev);
    prev = s;
  }
}

TEST(Qpn, ScalesAsInverseSqrtN) {
  const double s10 = qpn_sigma_oracle(10, 1.0, 200000, 1);
  const double s40 = qpn_sigma_oracle(40, 1.0, 200000, 2);
  EXPECT_NEAR(s40 / s10, 0.5, 0.025);
  EXPECT_LT(qpn_sigma_oracle(100000, 1.0, 10000, 3), 0.01);
}

// Small-angle oracle: for contrast 1 the per-shot phase variance is
// (sin^4 + cos^4)/N, averaging to 3/(4N) over the circle.
TEST(Qpn, MatchesLargeNAnalyticSpread) {
  const int n = 400;
  EXPECT_NEAR(qpn_sigma_oracle(n, 1.0, 100000, 4) / std::sqrt(0.75 / n), 1.0, 0.03);
}

TEST(Qpn, TenAtomsNearQuotedValueAtFullContrast) {
  const double s = qpn_sigma_oracle(10, 1.0, 200000, 5);
  EXPECT_NEAR(s / (pi * 0.0897), 1.0, 0.10);
  EXPECT_GT(qpn_sigma_oracle(10, 0.8, 200000, 5), s);
}

TEST(Qpn, Preconditions) {
  EXPECT_THROW(qpn_sigma_oracle(0, 1.0, 10000, 1), InvalidArgument);
  EXPECT_THROW(qpn_sigma_oracle(10, 0.0, 10000, 1), InvalidArgument);
  EXPECT_THROW(qpn_sigma_oracle(10, 1.0, 9999, 1), InvalidArgument);
}

TEST(Spam, PerfectChannelIsTransparent) {
  Engine rng(1);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(apply_spam(1.0, SpamParams::perfect(), rng));
    EXPECT_FALSE(apply_spam(0.0, SpamParams::perfect(), rng));
  }
}

TEST(Spam, ExcitedAtomLossAndGroundEjectionFailure) {
  SpamParams loss{0.9995, 0.9997, 1.0, 1.0};
  Engine rng(2);
  const int n = 1000000;
  int k = 0;
  for (int i = 0; i < n; ++i) k += apply_spam(1.0, loss, rng);
  EXPECT_NEAR(static_cast<double>(k) / n, 0.9995 * 0.9997, 0.0002);
  EXPECT_NEAR(static_cast<double>(k) / n, 0.9992, 0.0002);

  SpamParams eject{1.0, 1.0, 0.9967, 1.0};
  k = 0;
  for (int i = 0; i < n; ++i) k += apply_spam(0.0, eject, rng);
  EXPECT_NEAR(static_cast<double>(k) / n, 0.0033, 0.0002);
}

TEST(Spam, MeasuredFractionBoundsAndInverse) {
  const SpamParams s;
  EXPECT_NEAR(s.measured_fraction(0.0), 1 - s.eject, 1e-15);
  EXPECT_NEAR(s.measured_fraction(1.0), s.survival * s.detect, 1e-15);
  for (double p = 0; p <= 1.0; p += 0.125) {
    const double m = s.measured_fraction(p);
    EXPECT_GE(m, 1 - s.eject);
    EXPECT_LE(m, s.survival * s.detect);
    EXPECT_NEAR(s.corrected_fraction(m), p, 1e-12);
  }
  SpamParams bad{0.5, 0.5, 0.5, 1.0};
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Depolarize, ZeroProbabilityIsIdentityAndFullIsMixed) {
  Engine rng(3);
  const QubitState s{std::sqrt(0.2), std::sqrt(0.8)};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(depolarize(s, 0.0, rng).amp1, s.amp1);
  double pop = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) pop += depolarize(QubitState::excited(), 1.0, rng).excited_population();
  EXPECT_NEAR(pop / n, 0.5, 0.005);
}

TEST(NoiseKind, ParseRoundTrip) {
  for (auto k : {NoiseKind::shot_to_shot_frequency, NoiseKind::random_walk_phase, NoiseKind::power_law_sigma})
    EXPECT_EQ(parse_noise_kind(to_string(k)), k);
  EXPECT_THROW(parse_noise_kind("pink"), InvalidArgument);
}
