#include "heatid/regression.hpp"

#include <algorithm>
#include <cmath>

#include "heatid/errors.hpp"

namespace heatid {

Eigen::VectorXd PolyBasis::features(double T, double T_a) const {
  const double d = T_a - T;
  Eigen::VectorXd phi(order);
  double power = 1.0;
  for (int i = 0; i < order; ++i) {
    power *= d;
    phi(i) = power;
  }
  return phi;
}

RegressionPrior RegressionPrior::isotropic(int dim, double scale) {
  return {Eigen::VectorXd::Zero(dim), scale * Eigen::MatrixXd::Identity(dim, dim)};
}

double noise_variance(std::span<const double> smoothed_variances) {
  if (smoothed_variances.empty()) throw ValidationError("noise_variance needs at least one sample");
  double sum = 0.0;
  for (double v : smoothed_variances) sum += v;
  return sum / static_cast<double>(smoothed_variances.size());
}

namespace {

// Inverse of a symmetric positive definite matrix; adds diagonal jitter if
// the factorization fails.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, std::vector<std::string>& warnings,
                            const char* what) {
  const auto n = m.rows();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.solve(identity);

  double jitter = 1e-10 * std::max(m.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (int attempt = 0; attempt < 20; ++attempt, jitter *= 10.0) {
    llt.compute(m + jitter * identity);
    if (llt.info() == Eigen::Success) {
      warnings.push_back(std::string(what) + " not positive definite; solved with jitter " +
                         std::to_string(jitter));
      return llt.solve(identity);
    }
  }
  throw NumericalError(std::string(what) + " could not be factorized");
}

}  // namespace

PolyRegressionPosterior fit(std::span<const double> temps, std::span<const double> ambient,
                            std::span<const double> targets, const RegressionPrior& prior,
                            double noise_var, const PolyBasis& basis) {
  const int dim = basis.feature_dim();
  if (basis.order < 1) throw ValidationError("polynomial order must be >= 1");
  if (temps.size() != ambient.size() || temps.size() != targets.size())
    throw ValidationError("regression inputs and targets must have equal length");
  if (prior.mean.size() != dim || prior.cov.rows() != dim || prior.cov.cols() != dim)
    throw ValidationError("regression prior dimension must equal the basis dimension " +
                          std::to_string(dim));
  if (!(noise_var > 0.0) || !std::isfinite(noise_var))
    throw ValidationError("regression noise variance must be > 0");

  PolyRegressionPosterior post;
  post.basis = basis;
  post.noise_var = noise_var;

  const Eigen::MatrixXd prior_precision = spd_inverse(prior.cov, post.warnings, "prior covariance");

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(dim);
  for (std::size_t k = 0; k < temps.size(); ++k) {
    const Eigen::VectorXd phi = basis.features(temps[k], ambient[k]);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(phi);
    moment += phi * targets[k];
  }
  gram = gram.selfadjointView<Eigen::Lower>();

  Eigen::MatrixXd precision = prior_precision + gram / noise_var;
  precision = 0.5 * (precision + precision.transpose()).eval();
  post.sigma_cov = spd_inverse(precision, post.warnings, "posterior precision");
  post.sigma_cov = 0.5 * (post.sigma_cov + post.sigma_cov.transpose()).eval();
  post.mu = post.sigma_cov * (moment / noise_var + prior_precision * prior.mean);
  return post;
}

ScalarGaussian posterior_predictive(const PolyRegressionPosterior& post, double T, double T_a) {
  const Eigen::VectorXd phi = post.basis.features(T, T_a);
  return {post.mu.dot(phi), phi.dot(post.sigma_cov * phi) + post.noise_var};
}

double rhat(const PolyRegressionPosterior& post, double T, double T_a) {
  return post.mu.dot(post.basis.features(T, T_a));
}

}  // namespace heatid
