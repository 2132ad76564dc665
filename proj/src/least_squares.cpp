#include "dualres/least_squares.hpp"

#include <cmath>
#include <limits>

namespace dualres {

LmResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd p0, Eigen::Index residual_count,
                             const LmSettings& settings) {
  const Eigen::Index np = p0.size();
  Eigen::VectorXd p = std::move(p0);
  Eigen::VectorXd r(residual_count);
  Eigen::MatrixXd jac(residual_count, np);
  fn(p, r, &jac);
  double cost = r.squaredNorm();
  double lambda = settings.initial_damping;

  LmResult out;
  int it = 0;
  for (; it < settings.max_iterations; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    bool accepted = false;
    bool small_step = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index k = 0; k < np; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      const Eigen::VectorXd step = a.ldlt().solve(-jtr);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = p + step;
      Eigen::VectorXd r_trial(residual_count);
      fn(trial, r_trial, nullptr);
      const double trial_cost = r_trial.allFinite() ? r_trial.squaredNorm() : std::numeric_limits<double>::infinity();
      small_step = step.norm() <= settings.step_tolerance * (p.norm() + settings.step_tolerance);
      if (trial_cost <= cost) {
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        break;
      }
      if (small_step) break;
      lambda *= 10.0;
    }
    if (accepted) fn(p, r, &jac);
    // no descent left at any damping counts as a minimum
    if (small_step || !accepted) {
      out.converged = true;
      break;
    }
  }
  out.iterations = it;

  out.params = p;
  out.cost = cost;
  out.residual_rms = std::sqrt(cost / static_cast<double>(residual_count));
  const double dof = static_cast<double>(residual_count - np);
  const double s2 = dof > 0 ? cost / dof : std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (lu.isInvertible()) {
    out.covariance = s2 * lu.inverse();
    out.sigma = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else {
    out.covariance = Eigen::MatrixXd::Constant(np, np, std::numeric_limits<double>::quiet_NaN());
    out.sigma = Eigen::VectorXd::Constant(np, std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace dualres
