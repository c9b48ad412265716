#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatid/gp_sde.hpp"

namespace heatid {

/// Powers of the ambient difference d = T_a - T: phi = [d, d^2, ..., d^order].
/// No intercept, so phi(T_a, T_a) = 0.
struct PolyBasis {
  int order = 3;

  [[nodiscard]] int feature_dim() const { return order; }
  [[nodiscard]] Eigen::VectorXd features(double T, double T_a) const;
};

struct RegressionPrior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  /// N(0, scale I) of the given dimension.
  static RegressionPrior isotropic(int dim, double scale);
};

/// Conjugate posterior N(mu, sigma_cov) over the weights of one component,
/// with the fixed likelihood noise variance used for the fit.
struct PolyRegressionPosterior {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma_cov;
  double noise_var = 1.0;
  PolyBasis basis;
  std::vector<std::string> warnings;
};

/// Arithmetic mean of the smoothed GP-state variances of one component.
double noise_variance(std::span<const double> smoothed_variances);

/// Sigma = (Sigma0^-1 + s^-2 sum phi phi^T)^-1
/// mu    = Sigma (s^-2 sum phi m + Sigma0^-1 mu0)
/// temps, ambient and targets must have equal length (possibly zero).
PolyRegressionPosterior fit(std::span<const double> temps, std::span<const double> ambient,
                            std::span<const double> targets, const RegressionPrior& prior,
                            double noise_var, const PolyBasis& basis);

/// N(mu^T phi*, phi*^T Sigma phi* + noise_var).
ScalarGaussian posterior_predictive(const PolyRegressionPosterior& post, double T, double T_a);

/// Predictive mean, the identified convection function in W.
double rhat(const PolyRegressionPosterior& post, double T, double T_a);

}  // namespace heatid
