#pragma once

// Phase estimation from dual-quadrature shot records and the statistics built
// on it: deviation spread, slip probability, interrogation-time limits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "tzclock/angles.hpp"
#include "tzclock/errors.hpp"
#include "tzclock/least_squares.hpp"
#include "tzclock/phase_inversion.hpp"
#include "tzclock/special_functions.hpp"

namespace tzclock {

struct ShotRecord {
  double t = 0.0;
  double p_x = 0.5;
  double p_y = 0.5;
  int n_x = 1;
  int n_y = 1;

  void validate() const {
    if (!std::isfinite(t)) throw InvalidArgument("shot record: t must be finite");
    if (n_x < 1 || n_y < 1) throw InvalidArgument("shot record: atom numbers must be >= 1");
    for (auto [p, n] : {std::pair{p_x, n_x}, std::pair{p_y, n_y}}) {
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("shot record: fraction outside [0, 1]");
      const double k = p * n;
      if (std::abs(k - std::round(k)) > 1e-9)
        throw InvalidArgument("shot record: fraction is not a multiple of 1/n");
    }
  }
};

inline double estimate_phase(const ShotRecord& r) {
  r.validate();
  return estimate_phase_from_populations(r.p_x, r.p_y);
}

inline double phase_deviation(double theta, double theta_mean) {
  if (!std::isfinite(theta) || !std::isfinite(theta_mean))
    throw InvalidArgument("phase_deviation: inputs must be finite");
  return wrap_to_pi(theta - theta_mean);
}

// ---------------------------------------------------------------------------
// Mean phase from the shot-averaged fringes

struct MeanFringePoint {
  double t = 0.0;
  double p_x = 0.5;
  double p_y = 0.5;
  int shots = 0;
};

inline std::vector<MeanFringePoint> average_by_time(const std::vector<ShotRecord>& records) {
  std::map<double, MeanFringePoint> acc;
  for (const auto& r : records) {
    r.validate();
    auto& a = acc[r.t];
    if (a.shots == 0) a = {r.t, 0.0, 0.0, 0};
    a.p_x += r.p_x;
    a.p_y += r.p_y;
    ++a.shots;
  }
  std::vector<MeanFringePoint> out;
  for (auto& [t, a] : acc) {
    a.p_x /= a.shots;
    a.p_y /= a.shots;
    out.push_back(a);
  }
  return out;
}

// P_x = 0.5 + A e^{-(t/tau)^p} cos(2 pi f t + phi0), P_y the same with sin.
struct MeanPhaseCurve {
  double amplitude = 0.5;
  double tau_c = std::numeric_limits<double>::infinity();
  double shape = 1.0;
  double frequency = 0.0;  // cycles per unit of t
  double phase0 = 0.0;
  double chi2 = 0.0;
  Eigen::MatrixXd covariance;  // over (A, log tau, log p, f, phi0)
  std::vector<double> times;
  std::vector<double> theta_mean;

  double theta_at(double t) const { return wrap_to_pi(two_pi * frequency * t + phase0); }
  double envelope(double t) const {
    return amplitude * std::exp(-std::pow(std::max(t, 0.0) / tau_c, shape));
  }
};

namespace detail {

inline double fringe_envelope(const Eigen::VectorXd& x, double t) {
  const double tau = std::exp(x[1]);
  const double p = std::clamp(std::exp(x[2]), 0.3, 5.0);
  return x[0] * std::exp(-std::pow(std::max(t, 0.0) / tau, p));
}

// Weighted line fit y = a + b t; returns (a, b).
inline std::pair<double, double> weighted_line(const std::vector<double>& t,
                                               const std::vector<double>& y,
                                               const std::vector<double>& w) {
  double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sw += w[i];
    st += w[i] * t[i];
    sy += w[i] * y[i];
    stt += w[i] * t[i] * t[i];
    sty += w[i] * t[i] * y[i];
  }
  const double det = sw * stt - st * st;
  if (!(std::abs(det) > 0.0)) return {sw > 0 ? sy / sw : 0.0, 0.0};
  return {(sy * stt - st * sty) / det, (sw * sty - st * sy) / det};
}

}  // namespace detail

inline MeanPhaseCurve mean_phase_curve(const std::vector<MeanFringePoint>& points) {
  if (points.size() < 4) throw InsufficientDataError("mean_phase_curve: need >= 4 time points");
  std::vector<MeanFringePoint> pts = points;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  const std::size_t n = pts.size();

  // Starting point from the mean Bloch vector z = zx + i zy.
  std::vector<double> ts(n), arg(n), mag(n), w(n);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = pts[i].t;
    const double zx = 2.0 * pts[i].p_x - 1.0, zy = 2.0 * pts[i].p_y - 1.0;
    mag[i] = std::hypot(zx, zy);
    double a = mag[i] > 0.0 ? std::atan2(zy, zx) : prev;
    if (i > 0) a = prev + wrap_to_pi(a - prev);
    arg[i] = prev = a;
    w[i] = mag[i] * mag[i] + 1e-12;
  }
  const auto [phi_init, slope] = detail::weighted_line(ts, arg, w);
  const double mag0 = *std::max_element(mag.begin(), mag.end());
  const double span = ts.back() - ts.front();
  double tau0 = 2.0 * std::max(ts.back(), span) + 1e-9;
  for (std::size_t i = 0; i < n; ++i) {
    if (mag[i] < mag0 * std::exp(-1.0) && ts[i] > 0.0) {
      tau0 = ts[i];
      break;
    }
  }

  Eigen::VectorXd x0(5);
  x0 << std::max(0.5 * mag0, 1e-6), std::log(tau0), std::log(1.5), slope / two_pi, phi_init;

  auto residuals = [&pts, n](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(2 * static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double e = detail::fringe_envelope(x, pts[i].t);
      const double ph = two_pi * x[3] * pts[i].t + x[4];
      r[static_cast<Eigen::Index>(2 * i)] = 0.5 + e * std::cos(ph) - pts[i].p_x;
      r[static_cast<Eigen::Index>(2 * i + 1)] = 0.5 + e * std::sin(ph) - pts[i].p_y;
    }
    return r;
  };
  auto fit = levenberg_marquardt(residuals, x0);

  MeanPhaseCurve out;
  Eigen::VectorXd x = fit.params;
  if (x[0] < 0.0) {
    x[0] = -x[0];
    x[4] += pi;
  }
  out.amplitude = x[0];
  out.tau_c = std::exp(x[1]);
  out.shape = std::clamp(std::exp(x[2]), 0.3, 5.0);
  out.frequency = x[3];
  out.phase0 = wrap_to_pi(x[4]);
  out.chi2 = fit.chi2;
  out.covariance = fit.covariance;
  for (const auto& p : pts) {
    out.times.push_back(p.t);
    out.theta_mean.push_back(out.theta_at(p.t));
  }
  return out;
}

inline MeanPhaseCurve mean_phase_curve(const std::vector<ShotRecord>& records) {
  return mean_phase_curve(average_by_time(records));
}

// ---------------------------------------------------------------------------
// Folded Gaussian

struct FoldedGaussianFit {
  double sigma = 0.0;
  double log_likelihood = 0.0;
  int n = 0;
  int images = 0;           // image pairs summed at the optimum
  bool at_upper_bound = false;
  double stderr_ = 0.0;     // from the curvature of the log-likelihood
};

namespace detail {

// Image pairs needed so every dropped term is < 1e-12 of the central one.
inline int folded_images(double sigma, double half_range) {
  const double reach = std::sqrt(2.0 * std::log(1e12)) * sigma / half_range;
  return std::max(1, static_cast<int>(std::ceil(0.5 * (reach + 1.0))));
}

inline double folded_density(double x, double sigma, double half_range, int images) {
  const double norm = 1.0 / (sigma * std::sqrt(two_pi));
  double s = 0.0;
  for (int k = -images; k <= images; ++k) {
    const double u = (x + 2.0 * k * half_range) / sigma;
    s += std::exp(-0.5 * u * u);
  }
  return norm * s;
}

inline double folded_log_likelihood(const std::vector<double>& xs, double sigma, double half_range) {
  const int K = folded_images(sigma, half_range);
  double ll = 0.0;
  for (double x : xs) ll += std::log(std::max(folded_density(x, sigma, half_range, K), 1e-300));
  return ll;
}

inline std::vector<double> fold_into(const std::vector<double>& xs, double half_range) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    if (!std::isfinite(x)) throw InvalidArgument("folded fit: non-finite deviation");
    out.push_back(wrap_symmetric(x, half_range));
  }
  return out;
}

}  // namespace detail

inline double folded_gaussian_density(double x, double sigma, double half_range) {
  if (!(sigma > 0.0) || !(half_range > 0.0))
    throw InvalidArgument("folded density: sigma and B must be > 0");
  return detail::folded_density(wrap_symmetric(x, half_range), sigma, half_range,
                                detail::folded_images(sigma, half_range));
}

// Maximum likelihood sigma of a zero-mean Gaussian folded into [-B, B].
inline FoldedGaussianFit fit_folded_gaussian(const std::vector<double>& deviations,
                                             double half_range = pi) {
  if (!(half_range > 0.0)) throw InvalidArgument("fit_folded_gaussian: B must be > 0");
  if (deviations.size() < 50)
    throw InsufficientDataError("fit_folded_gaussian: need >= 50 samples, got " +
                                std::to_string(deviations.size()));
  const auto xs = detail::fold_into(deviations, half_range);
  const double lo = std::log(1e-6 * half_range);
  const double hi = std::log(20.0 * half_range);
  auto neg_ll = [&](double log_sigma) {
    return -detail::folded_log_likelihood(xs, std::exp(log_sigma), half_range);
  };
  const auto [best, value] = boost::math::tools::brent_find_minima(neg_ll, lo, hi, 40);
  FoldedGaussianFit out;
  out.sigma = std::exp(best);
  out.log_likelihood = -value;
  out.n = static_cast<int>(xs.size());
  out.images = detail::folded_images(out.sigma, half_range);
  out.at_upper_bound = best > hi - 1e-3;
  const double h = 1e-3 * out.sigma;
  const double curv = (detail::folded_log_likelihood(xs, out.sigma + h, half_range) - 2.0 * out.log_likelihood +
                       detail::folded_log_likelihood(xs, out.sigma - h, half_range)) / (h * h);
  out.stderr_ = curv < 0.0 ? 1.0 / std::sqrt(-curv) : std::numeric_limits<double>::infinity();
  return out;
}

// Least squares on a normalised histogram; kept as a cross-check of the MLE.
inline FoldedGaussianFit fit_folded_gaussian_histogram(const std::vector<double>& deviations,
                                                       double half_range = pi, int bins = 40) {
  if (!(half_range > 0.0)) throw InvalidArgument("fit_folded_gaussian: B must be > 0");
  if (bins < 4) throw InvalidArgument("fit_folded_gaussian_histogram: need >= 4 bins");
  if (deviations.size() < 50)
    throw InsufficientDataError("fit_folded_gaussian_histogram: need >= 50 samples");
  const auto xs = detail::fold_into(deviations, half_range);
  const double width = 2.0 * half_range / bins;
  std::vector<double> density(static_cast<std::size_t>(bins), 0.0);
  for (double x : xs) {
    auto b = static_cast<int>(std::floor((x + half_range) / width));
    b = std::clamp(b, 0, bins - 1);
    density[static_cast<std::size_t>(b)] += 1.0;
  }
  for (double& d : density) d /= static_cast<double>(xs.size()) * width;

  auto sse = [&](double log_sigma) {
    const double s = std::exp(log_sigma);
    const int K = detail::folded_images(s, half_range);
    double acc = 0.0;
    for (int b = 0; b < bins; ++b) {
      // Bin-averaged model density via Simpson's rule.
      const double a = -half_range + b * width;
      const double m = detail::folded_density(a, s, half_range, K) +
                       4.0 * detail::folded_density(a + 0.5 * width, s, half_range, K) +
                       detail::folded_density(a + width, s, half_range, K);
      const double d = m / 6.0 - density[static_cast<std::size_t>(b)];
      acc += d * d;
    }
    return acc;
  };
  const double lo = std::log(0.1 * width);
  const double hi = std::log(20.0 * half_range);
  const auto [best, value] = boost::math::tools::brent_find_minima(sse, lo, hi, 40);
  FoldedGaussianFit out;
  out.sigma = std::exp(best);
  out.log_likelihood = detail::folded_log_likelihood(xs, out.sigma, half_range);
  out.n = static_cast<int>(xs.size());
  out.images = detail::folded_images(out.sigma, half_range);
  out.at_upper_bound = best > hi - 1e-3;
  (void)value;
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms

struct QpnSubtraction {
  double sigma = 0.0;
  bool below_qpn = false;  // sigma_total < sigma_qpn, result clamped to 0
};

inline QpnSubtraction subtract_qpn(double sigma_total, double sigma_qpn) {
  if (!(sigma_total >= 0.0) || !(sigma_qpn >= 0.0))
    throw InvalidArgument("subtract_qpn: inputs must be >= 0");
  const double d = sigma_total * sigma_total - sigma_qpn * sigma_qpn;
  return {std::sqrt(std::max(d, 0.0)), sigma_total < sigma_qpn};
}

inline double phase_slip_probability(double sigma, double half_range) {
  if (!(sigma >= 0.0)) throw InvalidArgument("phase_slip_probability: sigma must be >= 0");
  if (!(half_range > 0.0)) throw InvalidArgument("phase_slip_probability: B must be > 0");
  if (sigma == 0.0) return 0.0;
  return std::erfc(half_range / (std::sqrt(2.0) * sigma));
}

inline double decay_envelope(double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("decay_envelope: sigma must be >= 0");
  return std::exp(-0.5 * sigma * sigma);
}

struct PhaseFit {
  double beta = 0.0;   // rad / time^alpha
  double alpha = 0.5;
  double sigma_qpn = 0.0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // (beta, alpha)
  bool alpha_identifiable = true;
  double chi2 = 0.0;

  double laser_sigma(double t) const { return beta * std::pow(t, alpha); }
  double total_sigma(double t) const { return std::hypot(laser_sigma(t), sigma_qpn); }
  double beta_stderr() const { return std::sqrt(std::max(covariance(0, 0), 0.0)); }
  double alpha_stderr() const { return std::sqrt(std::max(covariance(1, 1), 0.0)); }
};

inline double t_max(double epsilon, const PhaseFit& fit, double half_range) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("t_max: epsilon must lie in (0, 1)");
  if (!(fit.beta > 0.0)) throw InvalidArgument("t_max: beta must be > 0");
  if (!(fit.alpha > 0.0)) throw InvalidArgument("t_max: alpha must be > 0");
  if (!(half_range > 0.0)) throw InvalidArgument("t_max: B must be > 0");
  return std::pow(half_range / (std::sqrt(2.0) * fit.beta * erfc_inv(epsilon)), 1.0 / fit.alpha);
}

inline double metrological_gain_db(double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("metrological_gain_db: alpha must be > 0");
  return 10.0 * std::log10(std::pow(2.0, 1.0 / (2.0 * alpha)));
}

struct SigmaPoint {
  double t = 0.0;
  double sigma = 0.0;
  double stderr_ = 0.0;  // > 0 on every point switches to weighted residuals
};

// sigma(t)^2 = (beta t^alpha)^2 + sigma_qpn^2 with sigma_qpn held fixed.
inline PhaseFit fit_sigma_growth(const std::vector<SigmaPoint>& data, double sigma_qpn) {
  if (data.size() < 5) throw InsufficientDataError("fit_sigma_growth: need >= 5 time points");
  if (!(sigma_qpn >= 0.0)) throw InvalidArgument("fit_sigma_growth: sigma_qpn must be >= 0");
  for (const auto& d : data) {
    if (!(d.sigma >= 0.0) || !std::isfinite(d.sigma) || !(d.t >= 0.0) || !std::isfinite(d.t))
      throw InvalidArgument("fit_sigma_growth: need finite t >= 0 and sigma >= 0");
  }
  const auto [tmin, tmax] = std::minmax_element(data.begin(), data.end(),
                                                [](const auto& a, const auto& b) { return a.t < b.t; });
  if (tmin->t == tmax->t) throw FitError("fit_sigma_growth: all time points are equal");

  PhaseFit out;
  out.sigma_qpn = sigma_qpn;

  // Log-log start on the excess over projection noise.
  std::vector<double> lt, ls, w;
  for (const auto& d : data) {
    const double excess = d.sigma * d.sigma - sigma_qpn * sigma_qpn;
    if (d.t > 0.0 && excess > 1e-24) {
      lt.push_back(std::log(d.t));
      ls.push_back(0.5 * std::log(excess));
      w.push_back(1.0);
    }
  }
  std::set<double> distinct(lt.begin(), lt.end());
  if (distinct.size() < 2) {
    out.beta = 0.0;
    out.alpha = std::numeric_limits<double>::quiet_NaN();
    out.alpha_identifiable = false;
    return out;
  }
  const auto [log_beta, alpha0] = detail::weighted_line(lt, ls, w);

  const bool weighted = std::all_of(data.begin(), data.end(), [](const auto& d) {
    return d.stderr_ > 0.0 && std::isfinite(d.stderr_);
  });
  auto residuals = [&data, sigma_qpn, weighted](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double laser = x[0] * std::pow(data[i].t, x[1]);
      r[static_cast<Eigen::Index>(i)] =
          (std::hypot(laser, sigma_qpn) - data[i].sigma) / (weighted ? data[i].stderr_ : 1.0);
    }
    return r;
  };
  Eigen::VectorXd x0(2);
  x0 << std::exp(log_beta), std::max(alpha0, 1e-3);
  const auto fit = levenberg_marquardt(residuals, x0);
  out.beta = std::abs(fit.params[0]);
  out.alpha = fit.params[1];
  out.covariance = fit.covariance.topLeftCorner<2, 2>();
  out.chi2 = fit.chi2;
  const double scale = std::max_element(data.begin(), data.end(), [](const auto& a, const auto& b) {
                         return a.sigma < b.sigma;
                       })->sigma;
  if (out.beta <= 1e-9 * std::max(scale, 1e-300)) out.alpha_identifiable = false;
  if (!(out.alpha > 0.0)) throw FitError("fit_sigma_growth: fitted alpha is not positive",
                                          {"alpha=" + std::to_string(out.alpha)});
  return out;
}

// ---------------------------------------------------------------------------
// Per-time deviation statistics

struct DeviationPoint {
  double t = 0.0;
  double theta_mean = 0.0;
  std::vector<double> deviations;
  FoldedGaussianFit fit;
  QpnSubtraction laser;
  int undefined_shots = 0;  // both quadratures exactly at 0.5
};

struct PhaseNoiseAnalysis {
  MeanPhaseCurve mean;
  std::vector<DeviationPoint> points;
  std::optional<PhaseFit> growth;
  std::vector<std::string> warnings;
};

// Mean curve, per-time deviations and folded fits, then the sigma(t) fit.
// Fit failures are recorded as warnings, not thrown.
inline PhaseNoiseAnalysis analyze_phase_noise(const std::vector<ShotRecord>& records,
                                              double sigma_qpn, double half_range = pi) {
  PhaseNoiseAnalysis out;
  out.mean = mean_phase_curve(records);
  std::map<double, DeviationPoint> by_t;
  for (const auto& r : records) {
    auto& p = by_t[r.t];
    p.t = r.t;
    p.theta_mean = out.mean.theta_at(r.t);
    try {
      p.deviations.push_back(phase_deviation(estimate_phase(r), p.theta_mean));
    } catch (const UndefinedPhaseError&) {
      ++p.undefined_shots;
    }
  }
  std::vector<SigmaPoint> growth;
  for (auto& [t, p] : by_t) {
    try {
      p.fit = fit_folded_gaussian(p.deviations, half_range);
      p.laser = subtract_qpn(p.fit.sigma, sigma_qpn);
      growth.push_back({t, p.fit.sigma, p.fit.stderr_});
    } catch (const std::exception& e) {
      out.warnings.push_back("t=" + std::to_string(t) + ": " + e.what());
    }
    out.points.push_back(std::move(p));
  }
  try {
    out.growth = fit_sigma_growth(growth, sigma_qpn);
  } catch (const std::exception& e) {
    out.warnings.push_back(std::string("sigma growth fit: ") + e.what());
  }
  return out;
}

}  // namespace tzclock
