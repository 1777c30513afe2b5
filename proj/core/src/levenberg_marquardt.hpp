#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace mzweak::detail {

struct LmOptions {
  int max_iterations = 200;
  double initial_damping = 1e-3;
  double relative_tolerance = 1e-10;  // on the cost decrease of an accepted step
  /// A step is accepted when the actual cost decrease is at least this fraction
  /// of the decrease the linearized model predicts.
  double min_gain_ratio = 0.25;
};

struct LmResult {
  Eigen::VectorXd params;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
  Eigen::MatrixXd jtj;  // J^T J at the solution
};

/// Damped Gauss-Newton with Marquardt diagonal scaling.
///
/// `model(p, r, jac)` fills the residual vector r and, when jac is non-null,
/// the Jacobian dr/dp. Residual size is fixed by the first call.
/// Parameters are kept inside [lower, upper]; a parameter sitting on a bound
/// with the gradient pushing outward is held fixed for that iteration.
template <class Model>
LmResult levenberg_marquardt(Model&& model, Eigen::VectorXd p, const LmOptions& opt,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  p = p.cwiseMax(lower).cwiseMin(upper);
  const Eigen::Index n_params = p.size();
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  model(p, r, &jac);
  double cost = r.squaredNorm();

  LmResult out;
  double lambda = opt.initial_damping;
  Eigen::VectorXd r_trial(r.size());
  Eigen::MatrixXd a(n_params, n_params);
  Eigen::VectorXd g(n_params);

  // Costs at this level are indistinguishable from rounding in the residuals.
  const double cost_floor = 1e-28 * static_cast<double>(r.size());

  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    out.iterations = iter;
    if (!std::isfinite(cost)) break;
    if (cost <= cost_floor) {
      out.converged = true;
      break;
    }
    a.noalias() = jac.transpose() * jac;
    g.noalias() = jac.transpose() * r;
    Eigen::VectorXd diag = a.diagonal();
    const double floor = std::max(diag.maxCoeff(), 1.0) * 1e-12;
    diag = diag.cwiseMax(floor);
    for (Eigen::Index i = 0; i < n_params; ++i) {
      const bool pinned = (p[i] <= lower[i] && g[i] > 0.0) || (p[i] >= upper[i] && g[i] < 0.0);
      if (!pinned) continue;
      a.row(i).setZero();
      a.col(i).setZero();
      a(i, i) = 1.0;
      diag[i] = 1.0;
      g[i] = 0.0;
    }

    bool accepted = false;
    bool stationary = false;
    while (!accepted) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10.0;
      } else {
        const Eigen::VectorXd trial = (p + step).cwiseMax(lower).cwiseMin(upper);
        model(trial, r_trial, nullptr);
        const double trial_cost = r_trial.squaredNorm();
        const Eigen::VectorXd taken = trial - p;
        const double predicted = -(2.0 * taken.dot(g) + taken.dot(a * taken));
        const double gain = predicted > 0.0 ? (cost - trial_cost) / predicted : 0.0;
        if (std::isfinite(trial_cost) && trial_cost < cost && gain >= opt.min_gain_ratio) {
          const double decrease = (cost - trial_cost) / cost;
          p = trial;
          cost = trial_cost;
          lambda = std::max(lambda * 0.2, 1e-15);
          model(p, r, &jac);
          accepted = true;
          if (decrease < opt.relative_tolerance || step.norm() <= 1e-14 * (p.norm() + 1e-14)) {
            stationary = true;
          }
        } else {
          lambda *= 10.0;
        }
      }
      if (!accepted && lambda > 1e16) {
        // No descent direction left: the gradient vanishes to working precision.
        stationary = true;
        break;
      }
    }
    if (stationary) {
      out.converged = true;
      break;
    }
  }

  out.params = std::move(p);
  out.cost = cost;
  out.jtj = jac.transpose() * jac;
  return out;
}

template <class Model>
LmResult levenberg_marquardt(Model&& model, Eigen::VectorXd p, const LmOptions& opt) {
  const auto n = p.size();
  const double inf = std::numeric_limits<double>::infinity();
  return levenberg_marquardt(std::forward<Model>(model), std::move(p), opt, Eigen::VectorXd::Constant(n, -inf),
                             Eigen::VectorXd::Constant(n, inf));
}

}  // namespace mzweak::detail
