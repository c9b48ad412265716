#pragma once

#include <functional>

#include <Eigen/Dense>

#include "heatid/discretize.hpp"
#include "heatid/gp_sde.hpp"
#include "heatid/smoother.hpp"

namespace heatid {

/// Gamma distribution in shape-rate form: p(x) ∝ x^(alpha-1) exp(-beta x).
struct GammaPrior {
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;
  [[nodiscard]] double log_pdf(double x) const;
  [[nodiscard]] double mean() const { return alpha / beta; }
  /// Mode (alpha - 1) / beta, clamped at 0 for alpha < 1.
  [[nodiscard]] double mode() const;
};

struct HyperPriors {
  GammaPrior gamma;
  GammaPrior length;
};

struct OptimizerOptions {
  int max_evaluations = 500;
  double tolerance = 1e-4;  // simplex diameter in (ln gamma, ln l)
  double initial_step = 0.5;
};

/// log p(y_1:N | u_1:N; psi) + log p(gamma) + log p(l). Returns -inf if the
/// smoother fails numerically or psi is invalid.
double log_posterior(const KernelHyperparams& psi, const TimeSeriesData& data,
                     const StateSpaceConfig& config, const HyperPriors& priors);

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead minimisation. Stops once the largest vertex distance from the
/// best vertex drops below `options.tolerance` or the evaluation budget is
/// spent (converged = false).
SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& objective,
                               const Eigen::VectorXd& start, const OptimizerOptions& options);

struct MapResult {
  KernelHyperparams psi;
  double log_posterior = 0.0;
  int evaluations = 0;
  bool converged = false;  // false: best iterate returned after budget ran out
};

/// Maximises log_posterior over psi by simplex search in (ln gamma, ln l).
MapResult map_estimate(const TimeSeriesData& data, const StateSpaceConfig& config,
                       const HyperPriors& priors, const KernelHyperparams& init,
                       const OptimizerOptions& options = {});

/// Gaussian approximation N(psi_hat, precision^-1) of the hyperparameter
/// posterior. Order of the 2-vectors is (gamma, length).
struct LaplacePosterior {
  KernelHyperparams psi_hat;
  Eigen::Matrix2d precision = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  bool reliable = false;  // precision positive definite

  [[nodiscard]] Eigen::Vector2d marginal_std() const;
  [[nodiscard]] double log_density(const Eigen::Vector2d& psi) const;
};

/// Negative Hessian of `log_post` at `psi_hat` by central differences with
/// step max(1e-3 |psi_i|, 1e-6), symmetrised.
LaplacePosterior laplace_from_objective(
    const std::function<double(const Eigen::Vector2d&)>& log_post, const KernelHyperparams& psi_hat);

LaplacePosterior laplace_precision(const KernelHyperparams& psi_hat, const TimeSeriesData& data,
                                   const StateSpaceConfig& config, const HyperPriors& priors);

}  // namespace heatid
