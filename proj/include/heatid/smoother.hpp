#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatid/discretize.hpp"

namespace heatid {

struct GaussianState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Row k holds step k+1: inputs are [T_a, u_1..u_D] averaged over
/// (t_{k-1}, t_k], measurements are y_k. NaN entries in a measurement row
/// are treated as sensor dropout.
struct TimeSeriesData {
  double dt = 1.0;
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd measurements;

  [[nodiscard]] Eigen::Index size() const { return inputs.rows(); }
  void validate() const;
};

struct UpdateResult {
  GaussianState state;
  double log_evidence = 0.0;
};

struct SmootherResult {
  GaussianState prior;           // x_0 before any data
  GaussianState smoothed_prior;  // x_0 given all data
  std::vector<GaussianState> predicted;
  std::vector<GaussianState> filtered;
  std::vector<GaussianState> smoothed;
  double log_marginal = 0.0;
  std::vector<std::string> warnings;
};

/// m = A m + B u, S = A S A^T + Q (symmetrized).
GaussianState kf_predict(const GaussianState& prev, const DiscreteSystem& sys,
                         const Eigen::VectorXd& u);

/// Joseph-form correction. log_evidence is log N(y; C m, C S C^T + R) over
/// the observed (non-NaN) entries of y; an all-NaN y returns the prediction
/// unchanged with zero evidence. Throws NumericalError when the innovation
/// covariance is not positive definite.
UpdateResult kf_update(const GaussianState& pred, const Eigen::VectorXd& y,
                       const DiscreteSystem& sys);

/// Rauch-Tung-Striebel backward pass. filtered[k] and predicted[k] refer to
/// the same step; the last smoothed state equals the last filtered one.
/// A singular predicted covariance is inverted with diagonal jitter and a
/// message is appended to `warnings` when given.
std::vector<GaussianState> rts_smooth(const std::vector<GaussianState>& filtered,
                                      const std::vector<GaussianState>& predicted,
                                      const DiscreteSystem& sys,
                                      std::vector<std::string>* warnings = nullptr);

/// Forward filter and backward smoother over the whole series; also
/// smooths the k = 0 prior.
SmootherResult run_smoother(const TimeSeriesData& data, const DiscreteSystem& sys);

/// Forward pass only, returning sum_k log p(y_k | y_1:k-1).
double log_marginal_likelihood(const TimeSeriesData& data, const DiscreteSystem& sys);

}  // namespace heatid
