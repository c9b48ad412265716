#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatid/discretize.hpp"
#include "heatid/regression.hpp"
#include "heatid/smoother.hpp"
#include "heatid/thermal_model.hpp"

namespace heatid {

/// Constant heat input `power` (W) into one component on [start, end).
struct HeatPulse {
  Eigen::Index component = 0;
  double start = 0.0;
  double end = 0.0;  // +inf for "until the end"
  double power = 0.0;
};

/// Piecewise-linear ambient temperature through (time, value) knots, held
/// constant outside the knot range.
struct AmbientProfile {
  std::vector<double> times;
  std::vector<double> values;

  static AmbientProfile constant(double value) { return {{0.0}, {value}}; }
  [[nodiscard]] double at(double t) const;
  void validate() const;
};

struct SimulationScenario {
  LumpedThermalModel model;
  Eigen::VectorXd T0;
  AmbientProfile ambient = AmbientProfile::constant(21.0);
  std::vector<HeatPulse> heat_input;
  double dt = 1.0;
  int n_steps = 1;
  double noise_var = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  [[nodiscard]] Eigen::VectorXd heat_at(double t) const;
  /// [T_a, u_1..u_D] averaged over (t0, t1).
  [[nodiscard]] Eigen::VectorXd mean_input(double t0, double t1) const;
};

/// Nonlinear convection term r(T_i, T_a) per component, in W.
class ConvectionFn {
 public:
  using Scalar = std::function<double(Eigen::Index component, double T, double T_a)>;

  ConvectionFn() : ConvectionFn(zero()) {}
  ConvectionFn(std::string name, Scalar fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  static ConvectionFn zero();
  static ConvectionFn surrogate();
  /// r_hat from one regression posterior per component.
  static ConvectionFn identified(std::vector<PolyRegressionPosterior> posteriors);
  /// sum_j c_ij d^j with d = T_a - T, one coefficient vector per component
  /// (index 0 is the constant term).
  static ConvectionFn polynomial(std::vector<Eigen::VectorXd> coefficients);

  [[nodiscard]] double operator()(Eigen::Index component, double T, double T_a) const {
    return fn_(component, T, T_a);
  }
  [[nodiscard]] Eigen::VectorXd evaluate(const Eigen::VectorXd& T, double T_a) const;
  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  std::string name_;
  Scalar fn_;
};

struct SimulateOptions {
  /// RK4 steps per sample interval; 0 picks 1, or 10 when ||M^-1 F||_inf dt > 0.1.
  int substeps = 0;
};

/// Fixed-step RK4 integration of
///   dT/dt = M^-1 F T + M^-1 r(T_a, T) + M^-1 G [T_a; u]
/// Returns n_steps x D temperatures at t_k = k dt, k = 1..n_steps. Inputs
/// are held at their mid-substep value. Throws NumericalError on a
/// non-finite state.
Eigen::MatrixXd simulate(const SimulationScenario& scenario, const ConvectionFn& conv,
                         const SimulateOptions& options = {});

/// y_k = T_k + eps, eps ~ N(0, noise_var I) from a std::mt19937_64 seeded
/// with `seed`. Inputs are scenario.mean_input over each sample interval.
TimeSeriesData synthesize_measurements(const SimulationScenario& scenario,
                                       const Eigen::MatrixXd& trajectory, double noise_var,
                                       std::uint64_t seed);

struct ValidationResult {
  Eigen::MatrixXd reference;   // simulated with the true surrogate
  Eigen::MatrixXd identified;  // simulated with the identified function
  Eigen::MatrixXd abs_error;
  double rmse = 0.0;           // over all components and times
};

ValidationResult validate_forward(const SimulationScenario& scenario, const ConvectionFn& identified,
                                  const ConvectionFn& reference = ConvectionFn::surrogate());

struct BaselineResult {
  std::vector<Eigen::Index> components;  // component behind each measurement row
  Eigen::MatrixXd state_estimates;       // N x D smoothed temperatures
  Eigen::MatrixXd residuals;             // N x p, y - C m (NaN where y is missing)
  std::vector<Eigen::VectorXd> coefficients;  // per component [c0, c1, c2, c3]
  double log_marginal = 0.0;
  ValidationResult validation;
};

/// Offline alternative: smooth with the convection-free model (Q = q I),
/// fit a least-squares cubic with intercept in d = T_a - m to the post-fit
/// residuals of each measured component, and forward-validate with that
/// cubic injected as r. C rows must be unit selectors.
BaselineResult residual_baseline(const TimeSeriesData& data, const StateSpaceConfig& config,
                                 const SimulationScenario& validation_scenario,
                                 double process_noise = 1e-12);

/// Component index selected by each row of a unit-selector matrix C.
std::vector<Eigen::Index> measured_components(const Eigen::MatrixXd& c, Eigen::Index d);

}  // namespace heatid
