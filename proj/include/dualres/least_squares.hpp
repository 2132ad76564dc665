#pragma once

#include <functional>

#include <Eigen/Dense>

namespace dualres {

/// Fills the residual vector and, when `jacobian` is non-null, d residual / d p.
using ResidualFn = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& residual, Eigen::MatrixXd* jacobian)>;

struct LmSettings {
  int max_iterations = 200;
  double step_tolerance = 1e-10;  // relative to |p|
  double initial_damping = 1e-3;
};

struct LmResult {
  Eigen::VectorXd params;
  Eigen::VectorXd sigma;       // sqrt(diag(s^2 (J^T J)^-1)); NaN if singular
  Eigen::MatrixXd covariance;
  double cost = 0.0;           // sum of squared residuals
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton with Marquardt diagonal scaling.
LmResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd p0, Eigen::Index residual_count,
                             const LmSettings& settings = {});

}  // namespace dualres
