#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tzclock/estimation.hpp"

using namespace tzclock;

namespace {

// Independent complementary error function by adaptive quadrature.
double erfc_quadrature(double x) {
  using boost::math::quadrature::gauss_kronrod;
  const double v = gauss_kronrod<double, 61>::integrate([](double t) { return std::exp(-t * t); }, x,
                                                        x + 12.0, 15, 1e-15);
  return 2.0 / std::sqrt(pi) * v;
}

// Two-sided Gaussian tail probability P(|X| > b) by quadrature.
double gaussian_tail(double sigma, double b) {
  using boost::math::quadrature::gauss_kronrod;
  auto pdf = [sigma](double x) { return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(two_pi)); };
  return 2.0 * gauss_kronrod<double, 61>::integrate(pdf, b, b + 40.0 * sigma, 15, 1e-15);
}

// Samples of N(0, sigma) wrapped into [-B, B).
std::vector<double> folded_samples(double sigma, double b, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    double x = std::fmod(g(rng) + b, 2.0 * b);
    if (x < 0) x += 2.0 * b;
    out.push_back(x - b);
  }
  return out;
}

ShotRecord record(double px, double py, int n = 10, double t = 0.0) { return {t, px, py, n, n}; }

}  // namespace

TEST(EstimatePhase, Examples) {
  EXPECT_DOUBLE_EQ(estimate_phase(record(1.0, 0.5)), 0.0);
  EXPECT_DOUBLE_EQ(estimate_phase(record(0.5, 1.0)), pi / 2);
  EXPECT_DOUBLE_EQ(estimate_phase(record(0.0, 0.5)), pi);
  EXPECT_THROW(estimate_phase(record(0.5, 0.5)), UndefinedPhaseError);
  EXPECT_THROW(estimate_phase(record(0.55, 0.5)), InvalidArgument);
  EXPECT_THROW(estimate_phase(record(1.2, 0.5, 5)), InvalidArgument);
}

TEST(EstimatePhase, InvertsExactPopulationsOnFullRange) {
  for (int i = -100000; i <= 100000; ++i) {
    double th = pi * i / 100000.0;
    if (th <= -pi) continue;
    const double got = estimate_phase_from_populations(0.5 * (1 + std::cos(th)), 0.5 * (1 + std::sin(th)));
    ASSERT_NEAR(got, th, 1e-12) << th;
  }
}

TEST(EstimatePhase, SingleBasisAliasesSupplementaryAngles) {
  for (double th = -3.0; th <= 3.0; th += 0.01) {
    const double a = estimate_phase_single_basis(0.5 * (1 + std::sin(th)));
    const double b = estimate_phase_single_basis(0.5 * (1 + std::sin(pi - th)));
    EXPECT_NEAR(a, b, 1e-12);
    if (std::abs(th) > pi / 2 + 1e-9) {
      EXPECT_GT(std::abs(a - th), 1e-3);
      EXPECT_NEAR(estimate_phase_from_populations(0.5 * (1 + std::cos(th)), 0.5 * (1 + std::sin(th))), th, 1e-12);
    }
  }
}

TEST(PhaseDeviation, WrapConvention) {
  EXPECT_DOUBLE_EQ(phase_deviation(1.3, 1.3), 0.0);
  EXPECT_NEAR(phase_deviation(3 * pi / 2, 0.0), -pi / 2, 1e-15);
  EXPECT_DOUBLE_EQ(phase_deviation(pi, 0.0), pi);
  EXPECT_DOUBLE_EQ(phase_deviation(0.0, pi), pi);
  EXPECT_THROW(phase_deviation(NAN, 0.0), InvalidArgument);
}

TEST(MeanPhaseCurve, NoiselessFringesGiveDetuningPhase) {
  const double f = 0.37;  // cycles per unit time
  std::vector<MeanFringePoint> pts;
  for (int i = 0; i < 30; ++i) {
    const double t = 0.2 * i;
    pts.push_back({t, 0.5 * (1 + std::cos(two_pi * f * t)), 0.5 * (1 + std::sin(two_pi * f * t)), 1});
  }
  const auto c = mean_phase_curve(pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    EXPECT_NEAR(wrap_to_pi(c.theta_mean[i] - two_pi * f * pts[i].t), 0.0, 1e-6);
  EXPECT_NEAR(c.frequency, f, 1e-8);
}

TEST(MeanPhaseCurve, ConstantPopulationsGiveZeroPhase) {
  std::vector<MeanFringePoint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({1.0 * i, 1.0, 0.5, 1});
  const auto c = mean_phase_curve(pts);
  for (double th : c.theta_mean) EXPECT_NEAR(th, 0.0, 1e-9);
  EXPECT_THROW(mean_phase_curve(std::vector<MeanFringePoint>(pts.begin(), pts.begin() + 3)),
               InsufficientDataError);
}

// Binomially sampled fringes with a known stretched-exponential envelope.
TEST(MeanPhaseCurve, RecoversFrequencyFromSampledDecayingFringes) {
  const double f = 0.8, amp = 0.45, tau = 6.0, shape = 1.4, phi0 = 0.3;
  const int n_atoms = 10, shots = 200;
  std::mt19937_64 rng(7);
  std::vector<ShotRecord> recs;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.1 * i;
    const double e = amp * std::exp(-std::pow(t / tau, shape));
    const double px = 0.5 + e * std::cos(two_pi * f * t + phi0);
    const double py = 0.5 + e * std::sin(two_pi * f * t + phi0);
    for (int s = 0; s < shots; ++s) {
      const int kx = std::binomial_distribution<int>(n_atoms, px)(rng);
      const int ky = std::binomial_distribution<int>(n_atoms, py)(rng);
      recs.push_back({t, kx / 10.0, ky / 10.0, n_atoms, n_atoms});
    }
  }
  const auto c = mean_phase_curve(recs);
  EXPECT_NEAR(c.frequency / f, 1.0, 0.005);
  EXPECT_NEAR(c.amplitude, amp, 0.02);
  EXPECT_NEAR(wrap_to_pi(c.phase0 - phi0), 0.0, 0.02);
}

TEST(FoldedGaussian, DensityIsNormalisedAndMatchesImageSumOracle) {
  using boost::math::quadrature::gauss_kronrod;
  for (double b : {pi / 2, pi}) {
    for (double s : {0.05, 0.4, 1.5, 5.0}) {
      const double total = gauss_kronrod<double, 61>::integrate(
          [&](double x) { return folded_gaussian_density(x, s, b); }, -b, b, 15, 1e-13);
      EXPECT_NEAR(total, 1.0, 1e-9) << "sigma=" << s;
      // Brute-force image sum with 200 images on either side.
      for (double x : {-0.9 * b, 0.0, 0.33 * b}) {
        double brute = 0.0;
        for (int k = -200; k <= 200; ++k) {
          const double u = (x + 2 * k * b) / s;
          brute += std::exp(-0.5 * u * u) / (s * std::sqrt(two_pi));
        }
        if (brute > 1e-250)
          EXPECT_NEAR(folded_gaussian_density(x, s, b) / brute, 1.0, 1e-11);
        else
          EXPECT_LT(folded_gaussian_density(x, s, b), 1e-250);
      }
    }
  }
}

TEST(FoldedGaussian, SigmaPointThreeAtThousandSamples) {
  const auto fit = fit_folded_gaussian(folded_samples(0.3, pi, 1000, 1), pi);
  EXPECT_GE(fit.sigma, 0.285);
  EXPECT_LE(fit.sigma, 0.315);
}

TEST(FoldedGaussian, NoFoldingMatchesRootMeanSquare) {
  const auto xs = folded_samples(0.05, pi, 5000, 2);
  double ss = 0.0, mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (xs.size() - 1));
  EXPECT_NEAR(fit_folded_gaussian(xs, pi).sigma / sd, 1.0, 0.01);
}

TEST(FoldedGaussian, HeavyFolding) {
  const auto fit = fit_folded_gaussian(folded_samples(2.0, pi, 10000, 3), pi);
  EXPECT_NEAR(fit.sigma / 2.0, 1.0, 0.10);
}

class FoldedProperty : public ::testing::TestWithParam<std::tuple<double, double>> {};

TEST_P(FoldedProperty, RecoversSigmaWithinFivePercent) {
  const auto [ratio, b] = GetParam();
  const double sigma = ratio * b;
  const auto xs = folded_samples(sigma, b, 10000, static_cast<std::uint64_t>(1000 * ratio + 10 * b));
  EXPECT_NEAR(fit_folded_gaussian(xs, b).sigma / sigma, 1.0, 0.05);
  EXPECT_NEAR(fit_folded_gaussian_histogram(xs, b).sigma / sigma, 1.0, 0.05);
}

INSTANTIATE_TEST_SUITE_P(RatioGrid, FoldedProperty,
                         ::testing::Combine(::testing::Values(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7),
                                            ::testing::Values(pi, pi / 2)));

TEST(FoldedGaussian, NeedsFiftySamples) {
  EXPECT_THROW(fit_folded_gaussian(std::vector<double>(49, 0.1), pi), InsufficientDataError);
  EXPECT_NO_THROW(fit_folded_gaussian(folded_samples(0.2, pi, 50, 4), pi));
  EXPECT_THROW(fit_folded_gaussian(folded_samples(0.2, pi, 60, 4), 0.0), InvalidArgument);
}

TEST(SubtractQpn, Examples) {
  EXPECT_DOUBLE_EQ(subtract_qpn(0.3, 0.3).sigma, 0.0);
  EXPECT_FALSE(subtract_qpn(0.3, 0.3).below_qpn);
  EXPECT_DOUBLE_EQ(subtract_qpn(5, 3).sigma, 4);
  EXPECT_NEAR(subtract_qpn(pi * 0.1, pi * 0.0915).sigma / pi, std::sqrt(0.01 - 0.0915 * 0.0915), 1e-15);
  EXPECT_NEAR(subtract_qpn(pi * 0.1, pi * 0.0915).sigma / pi, 0.0404, 1e-4);
  const auto low = subtract_qpn(0.1, 0.2);
  EXPECT_EQ(low.sigma, 0.0);
  EXPECT_TRUE(low.below_qpn);
  EXPECT_THROW(subtract_qpn(-1, 0), InvalidArgument);
}

TEST(SubtractQpn, InvertsQuadratureAddition) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_NEAR(subtract_qpn(std::hypot(a, b), b).sigma, a, 1e-12 * (1 + a + b) / std::max(a, 1e-3));
  }
}

TEST(SlipProbability, ClosedFormAgainstQuadrature) {
  EXPECT_EQ(phase_slip_probability(0.0, pi), 0.0);
  EXPECT_LT(phase_slip_probability(1e-3, pi), 1e-300);
  EXPECT_NEAR(phase_slip_probability(pi / 2, pi), gaussian_tail(pi / 2, pi), 1e-12);
  EXPECT_NEAR(phase_slip_probability(pi / 2, pi), 0.04550, 5e-6);
  for (double s : {0.2, 0.7, 1.3})
    for (double b : {pi / 2, pi}) EXPECT_NEAR(phase_slip_probability(s, b), gaussian_tail(s, b), 1e-12);
}

TEST(SlipProbability, Monotonicity) {
  double prev = 0.0;
  for (double s = 0.1; s < 4.0; s += 0.05) {
    const double e = phase_slip_probability(s, pi);
    EXPECT_GT(e, prev);
    EXPECT_GT(phase_slip_probability(s, pi / 2), e);
    prev = e;
  }
  for (double b = 0.5; b < 4.0; b += 0.25)
    EXPECT_GT(phase_slip_probability(1.0, b), phase_slip_probability(1.0, b + 0.25));
}

TEST(DecayEnvelope, ClosedForms) {
  EXPECT_EQ(decay_envelope(0.0), 1.0);
  EXPECT_NEAR(decay_envelope(std::sqrt(2.0)), 0.3679, 5e-5);
  PhaseFit fit{pi * 0.117, 0.59, 0.0};
  const double t1 = std::pow(1.0 / fit.beta, 1.0 / fit.alpha);
  EXPECT_NEAR(decay_envelope(fit.laser_sigma(t1)), 0.6065, 5e-5);
  EXPECT_THROW(decay_envelope(-0.1), InvalidArgument);
}

TEST(ErfcInverse, AgainstQuadrature) {
  for (double x = -3.0; x <= 6.0; x += 0.173) {
    const double y = x >= 0 ? erfc_quadrature(x) : 2.0 - erfc_quadrature(-x);
    EXPECT_NEAR(erfc_inv(y), x, 1e-10 * std::max(1.0, std::abs(x))) << x;
  }
  for (double y : {1e-300, 1e-100, 1e-20, 1e-5, 0.3, 0.999999, 1.0, 1.7, 2.0 - 1e-12})
    EXPECT_NEAR(std::erfc(erfc_inv(y)) / y, 1.0, 1e-10) << y;
  EXPECT_THROW(erfc_inv(0.0), InvalidArgument);
  EXPECT_THROW(erfc_inv(2.0), InvalidArgument);
}

TEST(TMax, RatioOfRangesIsTwoToOneOverAlpha) {
  PhaseFit fit{pi * 0.117, 0.59, 0.0};
  for (double eps : {1e-4, 0.01, 0.1, 0.5}) {
    const double r = t_max(eps, fit, pi) / t_max(eps, fit, pi / 2);
    EXPECT_NEAR(r, std::pow(2.0, 1 / 0.59), 1e-9);
    EXPECT_NEAR(r, 3.24, 0.02);
  }
}

TEST(TMax, RoundTripThroughSlipProbability) {
  PhaseFit fit{pi * 0.117, 0.59, 0.0};
  for (double eps : {1e-6, 1e-3, 0.05, 0.3, 0.9})
    for (double b : {pi / 2, pi}) {
      const double T = t_max(eps, fit, b);
      EXPECT_NEAR(phase_slip_probability(fit.laser_sigma(T), b), eps, 1e-8 * std::max(eps, 1e-2));
    }
  for (double T : {0.1, 1.0, 7.5, 40.0}) {
    const double eps = phase_slip_probability(fit.laser_sigma(T), pi);
    EXPECT_NEAR(t_max(eps, fit, pi) / T, 1.0, 1e-8);
  }
}

// Bisection on the forward map eps(T) as an independent inversion.
TEST(TMax, IndependentRootFindingOracle) {
  PhaseFit fit{pi * 0.117, 0.59, 0.0};
  const double b = pi / 2, eps = 0.1;
  double lo = 1e-9, hi = 1e6;
  for (int i = 0; i < 300; ++i) {
    const double mid = std::sqrt(lo * hi);
    (phase_slip_probability(fit.laser_sigma(mid), b) < eps ? lo : hi) = mid;
  }
  EXPECT_NEAR(t_max(eps, fit, b) / lo, 1.0, 1e-10);
  EXPECT_THROW(t_max(0.0, fit, b), InvalidArgument);
  EXPECT_THROW(t_max(1.0, fit, b), InvalidArgument);
  EXPECT_THROW(t_max(0.1, PhaseFit{0.0, 0.5, 0.0}, b), InvalidArgument);
}

TEST(Gain, Decibels) {
  EXPECT_NEAR(metrological_gain_db(0.59), 2.55, 0.005);
  EXPECT_NEAR(metrological_gain_db(1.0), 10 * std::log10(std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(metrological_gain_db(1.0), 1.505, 5e-4);
  EXPECT_NEAR(metrological_gain_db(0.5), 3.010, 5e-4);
  EXPECT_THROW(metrological_gain_db(0.0), InvalidArgument);
  // Half the dB of the interrogation-time ratio.
  PhaseFit fit{1.0, 0.59, 0.0};
  EXPECT_NEAR(metrological_gain_db(0.59), 0.5 * 10 * std::log10(t_max(0.01, fit, pi) / t_max(0.01, fit, pi / 2)), 1e-9);
}

TEST(SigmaGrowth, ExactPowerLaw) {
  std::vector<SigmaPoint> pts;
  for (int i = 1; i <= 12; ++i) pts.push_back({0.5 * i, 0.4 * std::pow(0.5 * i, 0.7)});
  const auto fit = fit_sigma_growth(pts, 0.0);
  EXPECT_NEAR(fit.beta, 0.4, 1e-9);
  EXPECT_NEAR(fit.alpha, 0.7, 1e-9);
  EXPECT_TRUE(fit.alpha_identifiable);
}

TEST(SigmaGrowth, ReferenceParametersWithOnePercentNoise) {
  const double beta = pi * 0.117, alpha = 0.59, q = pi * 0.0915;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 0.01);
  std::vector<SigmaPoint> pts;
  for (int i = 1; i <= 40; ++i) {
    const double t = 0.25 * i;
    pts.push_back({t, std::hypot(beta * std::pow(t, alpha), q) * (1 + g(rng))});
  }
  const auto fit = fit_sigma_growth(pts, q);
  EXPECT_NEAR(fit.beta / beta, 1.0, 0.05);
  EXPECT_NEAR(fit.alpha / alpha, 1.0, 0.05);
  EXPECT_GT(fit.beta_stderr(), 0.0);
  EXPECT_GT(fit.alpha_stderr(), 0.0);
}

TEST(SigmaGrowth, DegenerateInputs) {
  std::vector<SigmaPoint> flat;
  for (int i = 1; i <= 6; ++i) flat.push_back({1.0 * i, 0.2});
  const auto fit = fit_sigma_growth(flat, 0.2);
  EXPECT_EQ(fit.beta, 0.0);
  EXPECT_FALSE(fit.alpha_identifiable);

  std::vector<SigmaPoint> same_t(6, SigmaPoint{2.0, 0.5});
  EXPECT_THROW(fit_sigma_growth(same_t, 0.0), FitError);
  EXPECT_THROW(fit_sigma_growth(std::vector<SigmaPoint>(4, SigmaPoint{1.0, 0.5}), 0.0), InsufficientDataError);
  flat[2].sigma = -1.0;
  EXPECT_THROW(fit_sigma_growth(flat, 0.0), InvalidArgument);
}

TEST(AnalyzePhaseNoise, SyntheticRecordsRecoverGrowth) {
  const double beta = 0.5, alpha = 0.6;
  const int n = 1000;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  std::vector<ShotRecord> recs;
  for (int i = 1; i <= 12; ++i) {
    const double t = 0.5 * i;
    for (int s = 0; s < 600; ++s) {
      const double th = beta * std::pow(t, alpha) * g(rng);
      const int kx = std::binomial_distribution<int>(n, 0.5 * (1 + std::cos(th)))(rng);
      const int ky = std::binomial_distribution<int>(n, 0.5 * (1 + std::sin(th)))(rng);
      recs.push_back({t, kx / double(n), ky / double(n), n, n});
    }
  }
  const double q = std::sqrt(0.75 / n);
  const auto a = analyze_phase_noise(recs, q, pi);
  ASSERT_TRUE(a.growth.has_value());
  EXPECT_NEAR(a.growth->beta / beta, 1.0, 0.05);
  EXPECT_NEAR(a.growth->alpha / alpha, 1.0, 0.05);
  EXPECT_EQ(a.points.size(), 12u);
  EXPECT_TRUE(a.warnings.empty());
}
