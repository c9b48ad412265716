#include "heatid/hyperlaplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "heatid/errors.hpp"

namespace heatid {

void GammaPrior::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw ValidationError("Gamma prior needs alpha > 0 and beta > 0");
}

double GammaPrior::log_pdf(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return alpha * std::log(beta) - std::lgamma(alpha) + (alpha - 1.0) * std::log(x) - beta * x;
}

double GammaPrior::mode() const { return alpha >= 1.0 ? (alpha - 1.0) / beta : 0.0; }

double log_posterior(const KernelHyperparams& psi, const TimeSeriesData& data,
                     const StateSpaceConfig& config, const HyperPriors& priors) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!(psi.gamma > 0.0) || !(psi.length > 0.0) || !std::isfinite(psi.gamma) ||
      !std::isfinite(psi.length))
    return kNegInf;
  double log_lik = kNegInf;
  try {
    log_lik = log_marginal_likelihood(data, build_state_space(config, psi));
  } catch (const NumericalError&) {
    return kNegInf;
  }
  if (!std::isfinite(log_lik)) return kNegInf;
  return log_lik + priors.gamma.log_pdf(psi.gamma) + priors.length.log_pdf(psi.length);
}

SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& objective,
                               const Eigen::VectorXd& start, const OptimizerOptions& options) {
  const Eigen::Index n = start.size();
  const auto m = static_cast<std::size_t>(n + 1);
  std::vector<Eigen::VectorXd> vertex(m, start);
  std::vector<double> value(m);

  SimplexResult result;
  const auto eval = [&](const Eigen::VectorXd& x) {
    ++result.evaluations;
    const double v = objective(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  for (Eigen::Index i = 0; i < n; ++i) vertex[static_cast<std::size_t>(i) + 1](i) += options.initial_step;
  for (std::size_t i = 0; i < m; ++i) value[i] = eval(vertex[i]);

  std::vector<std::size_t> order(m);
  const auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
  };

  // Standard coefficients: reflection 1, expansion 2, contraction 1/2, shrink 1/2.
  while (true) {
    sort_vertices();
    const auto best = order.front();
    const auto worst = order.back();
    const auto second_worst = order[m - 2];

    double diameter = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      diameter = std::max(diameter, (vertex[i] - vertex[best]).lpNorm<Eigen::Infinity>());
    if (diameter < options.tolerance) {
      result.converged = true;
      break;
    }
    if (result.evaluations >= options.max_evaluations) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < m; ++i) centroid += vertex[order[i]];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - vertex[worst]);
    const double f_reflected = eval(reflected);

    if (f_reflected < value[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - vertex[worst]);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        vertex[worst] = expanded;
        value[worst] = f_expanded;
      } else {
        vertex[worst] = reflected;
        value[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < value[second_worst]) {
      vertex[worst] = reflected;
      value[worst] = f_reflected;
      continue;
    }

    const bool outside = f_reflected < value[worst];
    const Eigen::VectorXd contracted = outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                                               : Eigen::VectorXd(centroid + 0.5 * (vertex[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < std::min(f_reflected, value[worst])) {
      vertex[worst] = contracted;
      value[worst] = f_contracted;
      continue;
    }

    for (std::size_t i = 0; i < m; ++i) {
      if (i == best) continue;
      vertex[i] = vertex[best] + 0.5 * (vertex[i] - vertex[best]);
      value[i] = eval(vertex[i]);
    }
  }

  result.x = vertex[order.front()];
  result.value = value[order.front()];
  return result;
}

MapResult map_estimate(const TimeSeriesData& data, const StateSpaceConfig& config,
                       const HyperPriors& priors, const KernelHyperparams& init,
                       const OptimizerOptions& options) {
  init.validate();
  priors.gamma.validate();
  priors.length.validate();

  const auto objective = [&](const Eigen::VectorXd& log_psi) {
    const KernelHyperparams psi{std::exp(log_psi(0)), std::exp(log_psi(1))};
    return -log_posterior(psi, data, config, priors);
  };
  const Eigen::Vector2d start(std::log(init.gamma), std::log(init.length));
  const SimplexResult found = minimize_simplex(objective, start, options);

  MapResult out;
  out.psi = {std::exp(found.x(0)), std::exp(found.x(1))};
  out.log_posterior = -found.value;
  out.evaluations = found.evaluations;
  out.converged = found.converged && std::isfinite(found.value);
  return out;
}

Eigen::Vector2d LaplacePosterior::marginal_std() const {
  return covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

double LaplacePosterior::log_density(const Eigen::Vector2d& psi) const {
  const Eigen::Vector2d diff = psi - Eigen::Vector2d(psi_hat.gamma, psi_hat.length);
  return -0.5 * diff.dot(precision * diff) - std::log(2.0 * std::numbers::pi) +
         0.5 * std::log(precision.determinant());
}

LaplacePosterior laplace_from_objective(
    const std::function<double(const Eigen::Vector2d&)>& log_post, const KernelHyperparams& psi_hat) {
  const Eigen::Vector2d center(psi_hat.gamma, psi_hat.length);
  const Eigen::Vector2d step = (1e-3 * center.cwiseAbs()).cwiseMax(1e-6);

  const auto at = [&](int i, double si, int j, double sj) {
    Eigen::Vector2d p = center;
    p(i) += si * step(i);
    p(j) += sj * step(j);
    return log_post(p);
  };

  Eigen::Matrix2d hessian;
  const double f0 = log_post(center);
  for (int i = 0; i < 2; ++i) {
    Eigen::Vector2d plus = center;
    Eigen::Vector2d minus = center;
    plus(i) += step(i);
    minus(i) -= step(i);
    hessian(i, i) = (log_post(plus) - 2.0 * f0 + log_post(minus)) / (step(i) * step(i));
  }
  hessian(0, 1) = (at(0, 1, 1, 1) - at(0, 1, 1, -1) - at(0, -1, 1, 1) + at(0, -1, 1, -1)) /
                  (4.0 * step(0) * step(1));
  hessian(1, 0) = hessian(0, 1);

  LaplacePosterior out;
  out.psi_hat = psi_hat;
  out.precision = -hessian;
  out.precision = 0.5 * (out.precision + out.precision.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(out.precision);
  out.reliable = out.precision.allFinite() && eig.eigenvalues().minCoeff() > 0.0;
  out.covariance = out.reliable ? Eigen::Matrix2d(out.precision.inverse())
                                : Eigen::Matrix2d::Constant(std::numeric_limits<double>::quiet_NaN());
  return out;
}

LaplacePosterior laplace_precision(const KernelHyperparams& psi_hat, const TimeSeriesData& data,
                                   const StateSpaceConfig& config, const HyperPriors& priors) {
  return laplace_from_objective(
      [&](const Eigen::Vector2d& p) {
        return log_posterior(KernelHyperparams{p(0), p(1)}, data, config, priors);
      },
      psi_hat);
}

}  // namespace heatid
