#pragma once

#include <Eigen/Dense>

#include "heatid/gp_sde.hpp"
#include "heatid/thermal_model.hpp"

namespace heatid {

/// Continuous-time model with one GP state per component appended to the
/// temperatures, x = [T; rho]:
///
///   dx/dt = [[M^-1 F, M^-1], [0, -lambda I]] x + [[M^-1 G], [0]] u + [[0], [I]] w
///
/// A single (lambda, v_c) is shared by all GP states.
struct AugmentedContinuous {
  Eigen::MatrixXd drift;       // 2D x 2D
  Eigen::MatrixXd input;       // 2D x (D+1)
  Eigen::MatrixXd noise_load;  // 2D x D
  double spectral_density = 0.0;
};

AugmentedContinuous augment(const ContinuousThermalMatrices& matrices,
                            const LumpedThermalModel& model, const SdeParams& sde);

struct DiscreteTransition {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

/// A = exp(dt * drift) via Padé scaling-and-squaring, B = dt * input.
DiscreteTransition discretize_system(const AugmentedContinuous& aug, double dt);

/// Process-noise covariance from the first-order expansion exp(At) ~ I + At
/// of the noise integral:
///   Q11 = dt^3/3 v_c M^-1 M^-T
///   Q12 = (dt^2/2 - lambda dt^3/3) v_c M^-1
///   Q22 = (dt - lambda dt^2 + lambda^2 dt^3/3) v_c I
/// returned after make_psd().
Eigen::MatrixXd process_noise_q(double dt, const SdeParams& sde, const LumpedThermalModel& model);

/// Symmetrizes in place; if Cholesky fails, adds 1e-12 trace/n to the
/// diagonal (growing tenfold until it factorizes).
void make_psd(Eigen::MatrixXd& q);

/// Linear-Gaussian state-space model
///   x_k = A x_{k-1} + B u_k + w_k,  w_k ~ N(0, Q)
///   y_k = C x_k + v_k,              v_k ~ N(0, R)
///   x_0 ~ N(m0, S0)
struct DiscreteSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd C;
  Eigen::MatrixXd R;
  Eigen::VectorXd m0;
  Eigen::MatrixXd S0;
  double dt = 1.0;

  [[nodiscard]] Eigen::Index state_dim() const { return A.rows(); }
  [[nodiscard]] Eigen::Index input_dim() const { return B.cols(); }
  [[nodiscard]] Eigen::Index measurement_dim() const { return C.rows(); }

  /// Throws ValidationError on inconsistent shapes.
  void check_dimensions() const;
};

/// Everything except the kernel hyperparameters needed to assemble the
/// augmented state-space model.
struct StateSpaceConfig {
  LumpedThermalModel model;
  Eigen::MatrixXd C;         // p x D (temperatures) or p x 2D
  Eigen::MatrixXd R;         // p x p
  Eigen::VectorXd m0_temps;  // prior mean of T_0
  Eigen::MatrixXd S0_temps;  // prior covariance of T_0
  double dt = 1.0;
};

/// m0 = [m0_temps; 0], S0 = blockdiag(S0_temps, gamma^2 I).
DiscreteSystem build_state_space(const StateSpaceConfig& config, const KernelHyperparams& psi);

/// Temperatures-only model (no GP states): A = exp(dt M^-1 F),
/// B = dt M^-1 G, Q = process_noise I. C must then be p x D.
DiscreteSystem build_convection_free_system(const StateSpaceConfig& config, double process_noise);

}  // namespace heatid
