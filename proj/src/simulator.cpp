#include "heatid/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "heatid/errors.hpp"

namespace heatid {

double AmbientProfile::at(double t) const {
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

void AmbientProfile::validate() const {
  if (times.empty() || times.size() != values.size())
    throw ValidationError("ambient profile needs matching, non-empty times and values");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ValidationError("ambient times must be increasing");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("ambient values must be finite");
}

void SimulationScenario::validate() const {
  model.validate();
  ambient.validate();
  if (T0.size() != model.n_components()) throw ValidationError("T0 must have D entries");
  if (!T0.allFinite()) throw ValidationError("T0 must be finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("scenario dt must be > 0");
  if (n_steps < 1) throw ValidationError("scenario n_steps must be >= 1");
  if (!(noise_var >= 0.0)) throw ValidationError("scenario noise_var must be >= 0");
  for (const auto& p : heat_input) {
    if (p.component < 0 || p.component >= model.n_components())
      throw ValidationError("heat pulse component out of range");
    if (!(p.end >= p.start) || !std::isfinite(p.power))
      throw ValidationError("heat pulse needs end >= start and finite power");
  }
}

Eigen::VectorXd SimulationScenario::heat_at(double t) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(model.n_components());
  for (const auto& p : heat_input)
    if (t >= p.start && t < p.end) u(p.component) += p.power;
  return u;
}

Eigen::VectorXd SimulationScenario::mean_input(double t0, double t1) const {
  const Eigen::Index d = model.n_components();
  Eigen::VectorXd out(d + 1);
  // Simpson is exact on a linear segment.
  out(0) = (ambient.at(t0) + 4.0 * ambient.at(0.5 * (t0 + t1)) + ambient.at(t1)) / 6.0;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
  const double width = t1 - t0;
  for (const auto& p : heat_input) {
    const double overlap = std::min(t1, p.end) - std::max(t0, p.start);
    if (overlap > 0.0) u(p.component) += p.power * overlap / width;
  }
  out.tail(d) = u;
  return out;
}

ConvectionFn ConvectionFn::zero() {
  return {"zero", [](Eigen::Index, double, double) { return 0.0; }};
}

ConvectionFn ConvectionFn::surrogate() {
  return {"surrogate",
          [](Eigen::Index, double T, double T_a) { return true_convection_surrogate(T, T_a); }};
}

ConvectionFn ConvectionFn::identified(std::vector<PolyRegressionPosterior> posteriors) {
  return {"identified", [posts = std::move(posteriors)](Eigen::Index i, double T, double T_a) {
            return rhat(posts.at(static_cast<std::size_t>(i)), T, T_a);
          }};
}

ConvectionFn ConvectionFn::polynomial(std::vector<Eigen::VectorXd> coefficients) {
  return {"polynomial", [coef = std::move(coefficients)](Eigen::Index i, double T, double T_a) {
            const auto& c = coef.at(static_cast<std::size_t>(i));
            const double d = T_a - T;
            double acc = 0.0;
            for (Eigen::Index j = c.size(); j-- > 0;) acc = acc * d + c(j);
            return acc;
          }};
}

Eigen::VectorXd ConvectionFn::evaluate(const Eigen::VectorXd& T, double T_a) const {
  Eigen::VectorXd out(T.size());
  for (Eigen::Index i = 0; i < T.size(); ++i) out(i) = fn_(i, T(i), T_a);
  return out;
}

Eigen::MatrixXd simulate(const SimulationScenario& scenario, const ConvectionFn& conv,
                         const SimulateOptions& options) {
  scenario.validate();
  const auto& model = scenario.model;
  const Eigen::Index d = model.n_components();
  const auto cont = build_continuous_matrices(model);
  const Eigen::VectorXd m_inv = model.inverse_capacity();
  const Eigen::MatrixXd drift = m_inv.asDiagonal() * cont.F;

  int substeps = options.substeps;
  if (substeps <= 0)
    substeps = drift.lpNorm<Eigen::Infinity>() * scenario.dt > 0.1 ? 10 : 1;
  const double h = scenario.dt / substeps;

  Eigen::VectorXd input(d + 1);
  const auto rhs = [&](double t, const Eigen::VectorXd& T) -> Eigen::VectorXd {
    const double t_a = scenario.ambient.at(t);
    input(0) = t_a;
    return drift * T + m_inv.cwiseProduct(conv.evaluate(T, t_a) + cont.G.rightCols(d) * input.tail(d) +
                                          cont.G.col(0) * t_a);
  };

  Eigen::MatrixXd out(scenario.n_steps, d);
  Eigen::VectorXd T = scenario.T0;
  for (int k = 0; k < scenario.n_steps; ++k) {
    for (int s = 0; s < substeps; ++s) {
      const double t = k * scenario.dt + s * h;
      input.tail(d) = scenario.heat_at(t + 0.5 * h);
      const Eigen::VectorXd k1 = rhs(t, T);
      const Eigen::VectorXd k2 = rhs(t + 0.5 * h, T + 0.5 * h * k1);
      const Eigen::VectorXd k3 = rhs(t + 0.5 * h, T + 0.5 * h * k2);
      const Eigen::VectorXd k4 = rhs(t + h, T + h * k3);
      T += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!T.allFinite())
      throw NumericalError("simulation blew up at step " + std::to_string(k + 1));
    out.row(k) = T.transpose();
  }
  return out;
}

TimeSeriesData synthesize_measurements(const SimulationScenario& scenario,
                                       const Eigen::MatrixXd& trajectory, double noise_var,
                                       std::uint64_t seed) {
  if (!(noise_var >= 0.0)) throw ValidationError("noise_var must be >= 0");
  const Eigen::Index n = trajectory.rows();
  const Eigen::Index d = trajectory.cols();
  if (d != scenario.model.n_components()) throw ValidationError("trajectory width must equal D");

  TimeSeriesData data;
  data.dt = scenario.dt;
  data.inputs.resize(n, d + 1);
  data.measurements = trajectory;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(noise_var));
  for (Eigen::Index k = 0; k < n; ++k) {
    data.inputs.row(k) = scenario.mean_input(k * scenario.dt, (k + 1) * scenario.dt).transpose();
    if (noise_var > 0.0)
      for (Eigen::Index i = 0; i < d; ++i) data.measurements(k, i) += noise(rng);
  }
  return data;
}

ValidationResult validate_forward(const SimulationScenario& scenario, const ConvectionFn& identified,
                                  const ConvectionFn& reference) {
  ValidationResult out;
  out.reference = simulate(scenario, reference);
  out.identified = simulate(scenario, identified);
  out.abs_error = (out.reference - out.identified).cwiseAbs();
  out.rmse = std::sqrt(out.abs_error.array().square().mean());
  return out;
}

std::vector<Eigen::Index> measured_components(const Eigen::MatrixXd& c, Eigen::Index d) {
  if (c.cols() < d) throw ValidationError("measurement matrix has too few columns");
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    Eigen::Index idx = -1;
    for (Eigen::Index i = 0; i < c.cols(); ++i) {
      if (c(j, i) == 0.0) continue;
      if (c(j, i) != 1.0 || idx >= 0 || i >= d)
        throw ValidationError("measurement row " + std::to_string(j) +
                              " is not a unit selector of a temperature");
      idx = i;
    }
    if (idx < 0) throw ValidationError("measurement row " + std::to_string(j) + " is empty");
    out.push_back(idx);
  }
  return out;
}

BaselineResult residual_baseline(const TimeSeriesData& data, const StateSpaceConfig& config,
                                 const SimulationScenario& validation_scenario,
                                 double process_noise) {
  const Eigen::Index d = config.model.n_components();
  const DiscreteSystem sys = build_convection_free_system(config, process_noise);
  const SmootherResult smooth = run_smoother(data, sys);

  BaselineResult out;
  out.components = measured_components(sys.C, d);
  out.log_marginal = smooth.log_marginal;
  const Eigen::Index n = data.size();
  out.state_estimates.resize(n, d);
  for (Eigen::Index k = 0; k < n; ++k)
    out.state_estimates.row(k) = smooth.smoothed[static_cast<std::size_t>(k)].mean.transpose();

  out.residuals = data.measurements - out.state_estimates * sys.C.transpose();
  out.coefficients.assign(static_cast<std::size_t>(d), Eigen::VectorXd::Zero(4));

  for (std::size_t j = 0; j < out.components.size(); ++j) {
    const Eigen::Index comp = out.components[j];
    std::vector<Eigen::Index> rows;
    for (Eigen::Index k = 0; k < n; ++k)
      if (!std::isnan(out.residuals(k, static_cast<Eigen::Index>(j)))) rows.push_back(k);
    if (rows.size() < 4) continue;

    Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), 4);
    Eigen::VectorXd target(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const Eigen::Index k = rows[r];
      const double diff = data.inputs(k, 0) - out.state_estimates(k, comp);
      const auto row = static_cast<Eigen::Index>(r);
      design(row, 0) = 1.0;
      design(row, 1) = diff;
      design(row, 2) = diff * diff;
      design(row, 3) = diff * diff * diff;
      target(row) = out.residuals(k, static_cast<Eigen::Index>(j));
    }
    out.coefficients[static_cast<std::size_t>(comp)] = design.colPivHouseholderQr().solve(target);
  }

  out.validation = validate_forward(validation_scenario, ConvectionFn::polynomial(out.coefficients));
  return out;
}

}  // namespace heatid
