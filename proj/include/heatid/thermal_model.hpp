#pragma once

#include <Eigen/Dense>

namespace heatid {

/// Lumped-element thermal system with D components.
///
/// Units are fixed throughout the library: temperatures in degC, heat flow
/// in W, heat capacity in J/K, time in s.
///
///   M dT/dt = K T + h_a diag(a) (T_a - T) + r(T, T_a) + u
struct LumpedThermalModel {
  Eigen::VectorXd heat_capacity;  // m_i * c_p,i, the diagonal of M
  Eigen::MatrixXd conductance;    // K, graph-Laplacian form
  double h_ambient = 0.0;         // h_a, W/(m^2 K)
  Eigen::VectorXd surface_area;   // a_i, m^2

  [[nodiscard]] Eigen::Index n_components() const { return heat_capacity.size(); }

  /// Throws ValidationError unless K is symmetric with non-negative
  /// off-diagonals and zero row sums (1e-9 absolute), capacities and areas
  /// are strictly positive and h_a >= 0.
  void validate() const;

  [[nodiscard]] Eigen::VectorXd inverse_capacity() const {
    return heat_capacity.cwiseInverse();
  }
};

/// Conductance matrix of a chain of components where k[i] couples
/// component i and i+1.
Eigen::MatrixXd chain_conductance(const Eigen::VectorXd& link_conductance);

/// F = K - diag(h_a a), G = [h_a a | I]. Input vector is [T_a, u_1..u_D].
struct ContinuousThermalMatrices {
  Eigen::MatrixXd F;
  Eigen::MatrixXd G;
};

ContinuousThermalMatrices build_continuous_matrices(const LumpedThermalModel& model);

/// Ground-truth nonlinear convection used for simulated experiments:
/// (T_a - T_i)^3 / 100, in W.
double true_convection_surrogate(double T_i, double T_a);

}  // namespace heatid
