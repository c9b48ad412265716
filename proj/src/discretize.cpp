#include "heatid/discretize.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "heatid/errors.hpp"

namespace heatid {

namespace {

Eigen::MatrixXd expand_measurement_matrix(const Eigen::MatrixXd& c, Eigen::Index d) {
  if (c.cols() == 2 * d) return c;
  if (c.cols() != d)
    throw ValidationError("measurement matrix C must have " + std::to_string(d) + " or " +
                          std::to_string(2 * d) + " columns");
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(c.rows(), 2 * d);
  full.leftCols(d) = c;
  return full;
}

void check_prior(const StateSpaceConfig& config) {
  const Eigen::Index d = config.model.n_components();
  if (config.m0_temps.size() != d) throw ValidationError("prior mean must have D entries");
  if (config.S0_temps.rows() != d || config.S0_temps.cols() != d)
    throw ValidationError("prior covariance must be DxD");
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) throw ValidationError("dt must be > 0");
}

}  // namespace

AugmentedContinuous augment(const ContinuousThermalMatrices& matrices,
                            const LumpedThermalModel& model, const SdeParams& sde) {
  const Eigen::Index d = model.n_components();
  if (matrices.F.rows() != d || matrices.F.cols() != d || matrices.G.rows() != d ||
      matrices.G.cols() != d + 1)
    throw ValidationError("continuous matrices do not match the model dimension");
  if (model.heat_capacity.size() != d) throw ValidationError("heat_capacity has wrong size");

  const Eigen::VectorXd m_inv = model.inverse_capacity();

  AugmentedContinuous aug;
  aug.drift = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  aug.drift.topLeftCorner(d, d) = m_inv.asDiagonal() * matrices.F;
  aug.drift.topRightCorner(d, d) = m_inv.asDiagonal();
  aug.drift.bottomRightCorner(d, d).diagonal().setConstant(-sde.lambda);

  aug.input = Eigen::MatrixXd::Zero(2 * d, d + 1);
  aug.input.topRows(d) = m_inv.asDiagonal() * matrices.G;

  aug.noise_load = Eigen::MatrixXd::Zero(2 * d, d);
  aug.noise_load.bottomRows(d).setIdentity();
  aug.spectral_density = sde.v_c;
  return aug;
}

DiscreteTransition discretize_system(const AugmentedContinuous& aug, double dt) {
  const Eigen::MatrixXd scaled = dt * aug.drift;
  DiscreteTransition out;
  out.A = scaled.exp();
  // exp of a block upper-triangular matrix keeps the zero block; pin it so
  // round-off cannot leak into it.
  const Eigen::Index d = aug.drift.rows() / 2;
  out.A.bottomLeftCorner(d, d).setZero();
  out.B = dt * aug.input;
  return out;
}

Eigen::MatrixXd process_noise_q(double dt, const SdeParams& sde, const LumpedThermalModel& model) {
  const Eigen::Index d = model.n_components();
  const Eigen::VectorXd m_inv = model.inverse_capacity();
  const double lam = sde.lambda;
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;

  const double c11 = dt3 / 3.0 * sde.v_c;
  const double c12 = (0.5 * dt2 - lam * dt3 / 3.0) * sde.v_c;
  const double c22 = (dt - lam * dt2 + lam * lam * dt3 / 3.0) * sde.v_c;

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    q(i, i) = c11 * m_inv(i) * m_inv(i);
    q(i, d + i) = q(d + i, i) = c12 * m_inv(i);
    q(d + i, d + i) = c22;
  }
  make_psd(q);
  return q;
}

void make_psd(Eigen::MatrixXd& q) {
  q = 0.5 * (q + q.transpose()).eval();
  if (q.size() == 0) return;
  if (Eigen::LLT<Eigen::MatrixXd>(q).info() == Eigen::Success) return;

  const double base = q.trace() / static_cast<double>(q.rows());
  double jitter = 1e-12 * (base > 0.0 ? base : 1.0);
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::MatrixXd candidate = q;
    candidate.diagonal().array() += jitter;
    if (Eigen::LLT<Eigen::MatrixXd>(candidate).info() == Eigen::Success) {
      q = std::move(candidate);
      return;
    }
    jitter *= 10.0;
  }
  throw NumericalError("process noise covariance is not positive semi-definite");
}

void DiscreteSystem::check_dimensions() const {
  const Eigen::Index n = A.rows();
  const auto fail = [](const std::string& what) { throw ValidationError("state-space model: " + what); };
  if (A.cols() != n) fail("A must be square");
  if (B.rows() != n) fail("B rows must equal state dimension");
  if (Q.rows() != n || Q.cols() != n) fail("Q must match A");
  if (C.cols() != n) fail("C columns must equal state dimension");
  if (R.rows() != C.rows() || R.cols() != C.rows()) fail("R must be p x p");
  if (m0.size() != n) fail("m0 must match state dimension");
  if (S0.rows() != n || S0.cols() != n) fail("S0 must match A");
}

DiscreteSystem build_state_space(const StateSpaceConfig& config, const KernelHyperparams& psi) {
  check_prior(config);
  const auto& model = config.model;
  const Eigen::Index d = model.n_components();
  const SdeParams sde = sde_params(psi);

  const auto aug = augment(build_continuous_matrices(model), model, sde);
  auto [a, b] = discretize_system(aug, config.dt);

  DiscreteSystem sys;
  sys.A = std::move(a);
  sys.B = std::move(b);
  sys.Q = process_noise_q(config.dt, sde, model);
  sys.C = expand_measurement_matrix(config.C, d);
  sys.R = config.R;
  sys.m0 = Eigen::VectorXd::Zero(2 * d);
  sys.m0.head(d) = config.m0_temps;
  sys.S0 = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  sys.S0.topLeftCorner(d, d) = config.S0_temps;
  sys.S0.bottomRightCorner(d, d).diagonal().setConstant(stationary_prior(psi).variance);
  sys.dt = config.dt;
  sys.check_dimensions();
  return sys;
}

DiscreteSystem build_convection_free_system(const StateSpaceConfig& config, double process_noise) {
  check_prior(config);
  const auto& model = config.model;
  const Eigen::Index d = model.n_components();
  const auto cont = build_continuous_matrices(model);
  const Eigen::VectorXd m_inv = model.inverse_capacity();

  DiscreteSystem sys;
  sys.A = (config.dt * (m_inv.asDiagonal() * cont.F)).eval().exp();
  sys.B = config.dt * (m_inv.asDiagonal() * cont.G);
  sys.Q = process_noise * Eigen::MatrixXd::Identity(d, d);
  if (config.C.cols() == d) {
    sys.C = config.C;
  } else if (config.C.cols() == 2 * d) {
    sys.C = config.C.leftCols(d);
  } else {
    throw ValidationError("measurement matrix C has wrong number of columns");
  }
  sys.R = config.R;
  sys.m0 = config.m0_temps;
  sys.S0 = config.S0_temps;
  sys.dt = config.dt;
  sys.check_dimensions();
  return sys;
}

}  // namespace heatid
