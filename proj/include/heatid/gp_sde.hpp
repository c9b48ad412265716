#pragma once

namespace heatid {

/// Hyperparameters of the exponential kernel
///   k(t, t') = gamma^2 exp(-(sqrt(3) / length) |t - t'|).
struct KernelHyperparams {
  double gamma = 1.0;   // output scale, W
  double length = 1.0;  // time length scale, s

  /// Throws ValidationError unless both are finite and > 0.
  void validate() const;
  bool operator==(const KernelHyperparams&) const = default;
};

/// Constants of the equivalent scalar SDE  d rho = -lambda rho dt + dw,
/// where w has spectral density v_c.
struct SdeParams {
  double lambda = 0.0;  // 1/s
  double v_c = 0.0;
};

struct ScalarGaussian {
  double mean = 0.0;
  double variance = 0.0;
};

double kernel_eval(const KernelHyperparams& psi, double t, double t2);

/// 2 lambda gamma^2 / (lambda^2 + omega^2), proportionality constant 1.
double spectral_density(const KernelHyperparams& psi, double omega);

/// lambda = sqrt(3) / length, v_c = 2 lambda gamma^2.
SdeParams sde_params(const KernelHyperparams& psi);

/// Stationary marginal N(0, gamma^2) of each GP state; used as its prior at k = 0.
ScalarGaussian stationary_prior(const KernelHyperparams& psi);

}  // namespace heatid
