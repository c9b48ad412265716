#include "heatid/thermal_model.hpp"

#include <cmath>
#include <string>

#include "heatid/errors.hpp"

namespace heatid {

namespace {
constexpr double kRowSumTolerance = 1e-9;
}

void LumpedThermalModel::validate() const {
  const Eigen::Index d = n_components();
  if (d < 1) throw ValidationError("thermal model needs at least one component");
  if (conductance.rows() != d || conductance.cols() != d)
    throw ValidationError("conductance must be " + std::to_string(d) + "x" + std::to_string(d));
  if (surface_area.size() != d)
    throw ValidationError("surface_area must have " + std::to_string(d) + " entries");
  if (!heat_capacity.allFinite() || (heat_capacity.array() <= 0.0).any())
    throw ValidationError("heat_capacity entries must be finite and > 0");
  if (!surface_area.allFinite() || (surface_area.array() <= 0.0).any())
    throw ValidationError("surface_area entries must be finite and > 0");
  if (!std::isfinite(h_ambient) || h_ambient < 0.0)
    throw ValidationError("h_ambient must be finite and >= 0");
  if (!conductance.allFinite()) throw ValidationError("conductance must be finite");

  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (conductance(i, j) != conductance(j, i))
        throw ValidationError("conductance must be symmetric (entry " + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      if (conductance(i, j) < 0.0)
        throw ValidationError("conductance off-diagonal entries must be >= 0");
    }
    if (std::abs(conductance.row(i).sum()) > kRowSumTolerance)
      throw ValidationError("conductance row " + std::to_string(i) + " must sum to 0");
  }
}

Eigen::MatrixXd chain_conductance(const Eigen::VectorXd& link_conductance) {
  const Eigen::Index d = link_conductance.size() + 1;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i + 1 < d; ++i) {
    const double c = link_conductance(i);
    k(i, i + 1) = k(i + 1, i) = c;
    k(i, i) -= c;
    k(i + 1, i + 1) -= c;
  }
  return k;
}

ContinuousThermalMatrices build_continuous_matrices(const LumpedThermalModel& model) {
  model.validate();
  const Eigen::Index d = model.n_components();
  const Eigen::VectorXd linear_convection = model.h_ambient * model.surface_area;

  ContinuousThermalMatrices out;
  out.F = model.conductance;
  out.F.diagonal() -= linear_convection;
  out.G = Eigen::MatrixXd::Zero(d, d + 1);
  out.G.col(0) = linear_convection;
  out.G.rightCols(d).setIdentity();
  return out;
}

double true_convection_surrogate(double T_i, double T_a) {
  const double diff = T_a - T_i;
  return diff * diff * diff / 100.0;
}

}  // namespace heatid
