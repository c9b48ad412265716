#include "heatid/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "heatid/errors.hpp"

namespace heatid {

namespace {

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

void check_consistent(const TimeSeriesData& data, const DiscreteSystem& sys) {
  data.validate();
  sys.check_dimensions();
  if (data.inputs.cols() != sys.input_dim())
    throw ValidationError("input width " + std::to_string(data.inputs.cols()) +
                          " does not match model input dimension " +
                          std::to_string(sys.input_dim()));
  if (data.measurements.cols() != sys.measurement_dim())
    throw ValidationError("measurement width " + std::to_string(data.measurements.cols()) +
                          " does not match model measurement dimension " +
                          std::to_string(sys.measurement_dim()));
}

template <typename Step>
void forward_pass(const TimeSeriesData& data, const DiscreteSystem& sys, Step&& on_step) {
  GaussianState state{sys.m0, sys.S0};
  for (Eigen::Index k = 0; k < data.size(); ++k) {
    GaussianState pred = kf_predict(state, sys, data.inputs.row(k).transpose());
    UpdateResult upd;
    try {
      upd = kf_update(pred, data.measurements.row(k).transpose(), sys);
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(k + 1) + ": " + e.what());
    }
    on_step(pred, upd);
    state = std::move(upd.state);
  }
}

}  // namespace

void TimeSeriesData::validate() const {
  if (inputs.rows() < 1) throw ValidationError("time series must contain at least one step");
  if (measurements.rows() != inputs.rows())
    throw ValidationError("inputs and measurements must have the same number of steps");
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (!inputs.allFinite()) throw ValidationError("inputs must be finite");
}

GaussianState kf_predict(const GaussianState& prev, const DiscreteSystem& sys,
                         const Eigen::VectorXd& u) {
  GaussianState out;
  out.mean = sys.A * prev.mean + sys.B * u;
  out.cov = sys.A * prev.cov * sys.A.transpose() + sys.Q;
  symmetrize(out.cov);
  return out;
}

UpdateResult kf_update(const GaussianState& pred, const Eigen::VectorXd& y,
                       const DiscreteSystem& sys) {
  std::vector<Eigen::Index> observed;
  observed.reserve(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!std::isnan(y(i))) observed.push_back(i);

  if (observed.empty()) return {pred, 0.0};

  Eigen::MatrixXd c;
  Eigen::MatrixXd r;
  Eigen::VectorXd yo;
  if (observed.size() == static_cast<std::size_t>(y.size())) {
    c = sys.C;
    r = sys.R;
    yo = y;
  } else {
    c = sys.C(observed, Eigen::placeholders::all);
    r = sys.R(observed, observed);
    yo = y(observed);
  }

  const Eigen::VectorXd innovation = yo - c * pred.mean;
  const Eigen::MatrixXd cs = c * pred.cov;
  Eigen::MatrixXd innov_cov = cs * c.transpose() + r;
  symmetrize(innov_cov);

  const Eigen::LLT<Eigen::MatrixXd> llt(innov_cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError("innovation covariance is not positive definite (singular model)");

  // K = S C^T (C S C^T + R)^-1
  const Eigen::MatrixXd gain = llt.solve(cs).transpose();
  const Eigen::Index n = pred.mean.size();
  const Eigen::MatrixXd i_kc = Eigen::MatrixXd::Identity(n, n) - gain * c;

  UpdateResult out;
  out.state.mean = pred.mean + gain * innovation;
  out.state.cov = i_kc * pred.cov * i_kc.transpose() + gain * r * gain.transpose();
  symmetrize(out.state.cov);

  const Eigen::VectorXd whitened = llt.matrixL().solve(innovation);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const auto p = static_cast<double>(yo.size());
  out.log_evidence =
      -0.5 * whitened.squaredNorm() - 0.5 * log_det - 0.5 * p * std::log(2.0 * std::numbers::pi);
  return out;
}

namespace {

// Smoother gain S_filt A^T S_pred^-1, computed through a Cholesky solve.
Eigen::MatrixXd smoother_gain(const Eigen::MatrixXd& filtered_cov, const Eigen::MatrixXd& pred_cov,
                              const DiscreteSystem& sys, std::vector<std::string>* warnings,
                              std::size_t step) {
  const Eigen::MatrixXd rhs = sys.A * filtered_cov;
  Eigen::LLT<Eigen::MatrixXd> llt(pred_cov);
  if (llt.info() == Eigen::Success) return llt.solve(rhs).transpose();

  const auto n = pred_cov.rows();
  double jitter = 1e-12 * std::max(pred_cov.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (int attempt = 0; attempt < 20; ++attempt, jitter *= 10.0) {
    llt.compute(pred_cov + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      if (warnings)
        warnings->push_back("step " + std::to_string(step) +
                            ": singular predicted covariance, inverted with jitter " +
                            std::to_string(jitter));
      return llt.solve(rhs).transpose();
    }
  }
  throw NumericalError("step " + std::to_string(step) + ": predicted covariance is singular");
}

}  // namespace

std::vector<GaussianState> rts_smooth(const std::vector<GaussianState>& filtered,
                                      const std::vector<GaussianState>& predicted,
                                      const DiscreteSystem& sys,
                                      std::vector<std::string>* warnings) {
  if (filtered.size() != predicted.size())
    throw ValidationError("filtered and predicted sequences must be aligned");
  std::vector<GaussianState> smoothed(filtered.size());
  if (filtered.empty()) return smoothed;

  smoothed.back() = filtered.back();
  for (std::size_t k = filtered.size() - 1; k-- > 0;) {
    const Eigen::MatrixXd gain =
        smoother_gain(filtered[k].cov, predicted[k + 1].cov, sys, warnings, k + 1);
    auto& out = smoothed[k];
    out.mean = filtered[k].mean + gain * (smoothed[k + 1].mean - predicted[k + 1].mean);
    out.cov = filtered[k].cov + gain * (smoothed[k + 1].cov - predicted[k + 1].cov) * gain.transpose();
    symmetrize(out.cov);
  }
  return smoothed;
}

SmootherResult run_smoother(const TimeSeriesData& data, const DiscreteSystem& sys) {
  check_consistent(data, sys);

  SmootherResult result;
  result.prior = {sys.m0, sys.S0};
  const auto n = static_cast<std::size_t>(data.size());
  result.predicted.reserve(n);
  result.filtered.reserve(n);

  forward_pass(data, sys, [&](const GaussianState& pred, const UpdateResult& upd) {
    result.predicted.push_back(pred);
    result.filtered.push_back(upd.state);
    result.log_marginal += upd.log_evidence;
  });

  result.smoothed = rts_smooth(result.filtered, result.predicted, sys, &result.warnings);

  const Eigen::MatrixXd gain =
      smoother_gain(sys.S0, result.predicted.front().cov, sys, &result.warnings, 0);
  result.smoothed_prior.mean =
      sys.m0 + gain * (result.smoothed.front().mean - result.predicted.front().mean);
  result.smoothed_prior.cov =
      sys.S0 + gain * (result.smoothed.front().cov - result.predicted.front().cov) * gain.transpose();
  symmetrize(result.smoothed_prior.cov);
  return result;
}

double log_marginal_likelihood(const TimeSeriesData& data, const DiscreteSystem& sys) {
  check_consistent(data, sys);
  double total = 0.0;
  forward_pass(data, sys, [&](const GaussianState&, const UpdateResult& upd) {
    total += upd.log_evidence;
  });
  return total;
}

}  // namespace heatid
