#include "heatid/gp_sde.hpp"

#include <cmath>
#include <numbers>

#include "heatid/errors.hpp"

namespace heatid {

void KernelHyperparams::validate() const {
  if (!std::isfinite(gamma) || gamma <= 0.0) throw ValidationError("kernel gamma must be > 0");
  if (!std::isfinite(length) || length <= 0.0) throw ValidationError("kernel length must be > 0");
}

double kernel_eval(const KernelHyperparams& psi, double t, double t2) {
  const double lambda = std::numbers::sqrt3 / psi.length;
  return psi.gamma * psi.gamma * std::exp(-lambda * std::abs(t - t2));
}

double spectral_density(const KernelHyperparams& psi, double omega) {
  const double lambda = std::numbers::sqrt3 / psi.length;
  return 2.0 * lambda * psi.gamma * psi.gamma / (lambda * lambda + omega * omega);
}

SdeParams sde_params(const KernelHyperparams& psi) {
  psi.validate();
  SdeParams out;
  out.lambda = std::numbers::sqrt3 / psi.length;
  out.v_c = 2.0 * out.lambda * psi.gamma * psi.gamma;
  return out;
}

ScalarGaussian stationary_prior(const KernelHyperparams& psi) {
  psi.validate();
  return {0.0, psi.gamma * psi.gamma};
}

}  // namespace heatid
