#pragma once

// Small dense nonlinear least squares (Levenberg-Marquardt with a central
// difference Jacobian) for the handful-of-parameter fits used here.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tzclock/errors.hpp"

namespace tzclock {

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // s^2 (J^T J)^+, s^2 = chi2 / (n - p)
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct LeastSquaresOptions {
  int max_iterations = 500;
  double relative_tolerance = 1e-14;
  double initial_damping = 1e-3;
};

namespace detail {

inline Eigen::MatrixXd numeric_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x,
                                        Eigen::Index n_residuals) {
  Eigen::MatrixXd J(n_residuals, x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

}  // namespace detail

inline LeastSquaresResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd x,
                                              const LeastSquaresOptions& opts = {}) {
  Eigen::VectorXd r = f(x);
  if (!r.allFinite()) throw FitError("least squares: residuals not finite at the initial guess");
  const Eigen::Index n = r.size();
  const Eigen::Index p = x.size();
  if (n < p) throw FitError("least squares: fewer residuals than parameters");

  double chi2 = r.squaredNorm();
  double lambda = opts.initial_damping;
  LeastSquaresResult out;
  Eigen::MatrixXd J = detail::numeric_jacobian(f, x, n);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() == 0.0) {
      out.converged = true;
      break;
    }
    bool improved = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      const Eigen::VectorXd x_new = x + step;
      const Eigen::VectorXd r_new = f(x_new);
      const double chi2_new = r_new.allFinite() ? r_new.squaredNorm()
                                                : std::numeric_limits<double>::infinity();
      if (chi2_new <= chi2) {
        const double drop = chi2 - chi2_new;
        x = x_new;
        r = r_new;
        chi2 = chi2_new;
        lambda = std::max(lambda / 10.0, 1e-15);
        improved = true;
        if (drop <= opts.relative_tolerance * std::max(chi2, 1e-300) ||
            step.norm() <= opts.relative_tolerance * (x.norm() + opts.relative_tolerance))
          out.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) {
      // No downhill step at any damping: x is a (numerical) minimum.
      out.converged = true;
      break;
    }
    if (out.converged) break;
    J = detail::numeric_jacobian(f, x, n);
  }

  out.params = x;
  out.chi2 = chi2;
  out.iterations = it;
  J = detail::numeric_jacobian(f, x, n);
  const double dof = static_cast<double>(std::max<Eigen::Index>(n - p, 1));
  const Eigen::MatrixXd JtJ = J.transpose() * J;
  out.covariance = (chi2 / dof) * JtJ.completeOrthogonalDecomposition().pseudoInverse();
  if (!out.converged)
    throw FitError("least squares did not converge",
                   {"iterations=" + std::to_string(it), "chi2=" + std::to_string(chi2),
                    "damping=" + std::to_string(lambda)});
  return out;
}

}  // namespace tzclock
