#include "heatid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "heatid/errors.hpp"

namespace heatid {

namespace {

std::string idx_name(const char* prefix, Eigen::Index i) { return prefix + std::to_string(i + 1); }

ResultsDocument open_results(const RunConfig& config, const CommandPaths& paths) {
  ResultsDocument doc = load_results(paths.results_path());
  doc.provenance = {config.config_hash, config.seed, kVersion};
  return doc;
}

void ensure_out_dir(const CommandPaths& paths) { std::filesystem::create_directories(paths.out_dir); }

TimeSeriesData load_measurements(const RunConfig& config, const CommandPaths& paths) {
  TimeSeriesData full =
      read_measurements_csv(paths.data_path(), config.n_components(), config.allow_dropout);
  if (std::abs(full.dt - config.dt) > 1e-9 * config.dt)
    throw ValidationError(paths.data_path().string() + ": sample spacing " + format_double(full.dt) +
                          " differs from config dt " + format_double(config.dt));
  return select_measured(full, config.measured);
}

CsvTable trajectory_table(const ValidationResult& v, double dt) {
  const Eigen::Index n = v.reference.rows();
  const Eigen::Index d = v.reference.cols();
  CsvTable t;
  t.header = {"t"};
  for (Eigen::Index i = 0; i < d; ++i) t.header.push_back(idx_name("true_T_", i));
  for (Eigen::Index i = 0; i < d; ++i) t.header.push_back(idx_name("identified_T_", i));
  for (Eigen::Index i = 0; i < d; ++i) t.header.push_back(idx_name("abs_error_", i));
  t.values.resize(n, 1 + 3 * d);
  for (Eigen::Index k = 0; k < n; ++k) {
    t.values(k, 0) = static_cast<double>(k + 1) * dt;
    t.values.row(k).segment(1, d) = v.reference.row(k);
    t.values.row(k).segment(1 + d, d) = v.identified.row(k);
    t.values.row(k).tail(d) = v.abs_error.row(k);
  }
  return t;
}

}  // namespace

SmoothedStates extract_states(const SmootherResult& result, const TimeSeriesData& data) {
  const auto n = static_cast<Eigen::Index>(result.smoothed.size());
  if (n == 0) throw ValidationError("empty smoother result");
  const Eigen::Index d = result.smoothed.front().mean.size() / 2;
  SmoothedStates s;
  s.time.resize(n);
  s.ambient = data.inputs.col(0);
  s.temp_mean.resize(n, d);
  s.temp_var.resize(n, d);
  s.gp_mean.resize(n, d);
  s.gp_var.resize(n, d);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& st = result.smoothed[static_cast<std::size_t>(k)];
    s.time(k) = static_cast<double>(k + 1) * data.dt;
    s.temp_mean.row(k) = st.mean.head(d).transpose();
    s.gp_mean.row(k) = st.mean.tail(d).transpose();
    s.temp_var.row(k) = st.cov.diagonal().head(d).transpose();
    s.gp_var.row(k) = st.cov.diagonal().tail(d).transpose();
  }
  return s;
}

CsvTable states_table(const SmoothedStates& s) {
  const Eigen::Index n = s.time.size();
  const Eigen::Index d = s.temp_mean.cols();
  CsvTable t;
  t.header = {"t", "T_a"};
  for (const char* p : {"T_", "var_T_", "rho_", "var_rho_"})
    for (Eigen::Index i = 0; i < d; ++i) t.header.push_back(idx_name(p, i));
  t.values.resize(n, 2 + 4 * d);
  t.values.col(0) = s.time;
  t.values.col(1) = s.ambient;
  t.values.middleCols(2, d) = s.temp_mean;
  t.values.middleCols(2 + d, d) = s.temp_var;
  t.values.middleCols(2 + 2 * d, d) = s.gp_mean;
  t.values.middleCols(2 + 3 * d, d) = s.gp_var;
  return t;
}

SmoothedStates states_from_table(const CsvTable& t, Eigen::Index d) {
  const CsvTable expected = states_table(SmoothedStates{Eigen::VectorXd(0), Eigen::VectorXd(0),
                                                        Eigen::MatrixXd(0, d), Eigen::MatrixXd(0, d),
                                                        Eigen::MatrixXd(0, d), Eigen::MatrixXd(0, d)});
  if (t.header != expected.header) throw ValidationError("smoothed states table has an unexpected header");
  if (t.values.rows() < 1 || !t.values.allFinite())
    throw ValidationError("smoothed states table must be non-empty and fully numeric");
  SmoothedStates s;
  s.time = t.values.col(0);
  s.ambient = t.values.col(1);
  s.temp_mean = t.values.middleCols(2, d);
  s.temp_var = t.values.middleCols(2 + d, d);
  s.gp_mean = t.values.middleCols(2 + 2 * d, d);
  s.gp_var = t.values.middleCols(2 + 3 * d, d);
  return s;
}

std::vector<PolyRegressionPosterior> regress_components(const SmoothedStates& states,
                                                        const RegressionPrior& prior,
                                                        const PolyBasis& basis) {
  const Eigen::Index d = states.temp_mean.cols();
  const Eigen::Index n = states.temp_mean.rows();
  std::vector<PolyRegressionPosterior> out;
  out.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::VectorXd temps = states.temp_mean.col(i);
    const Eigen::VectorXd targets = states.gp_mean.col(i);
    const Eigen::VectorXd vars = states.gp_var.col(i);
    const double sigma2 = noise_variance({vars.data(), static_cast<std::size_t>(n)});
    out.push_back(fit({temps.data(), static_cast<std::size_t>(n)},
                      {states.ambient.data(), static_cast<std::size_t>(n)},
                      {targets.data(), static_cast<std::size_t>(n)}, prior, sigma2, basis));
  }
  return out;
}

TimeSeriesData select_measured(const TimeSeriesData& full, const std::vector<Eigen::Index>& measured) {
  TimeSeriesData out;
  out.dt = full.dt;
  out.inputs = full.inputs;
  out.measurements.resize(full.measurements.rows(), static_cast<Eigen::Index>(measured.size()));
  for (std::size_t j = 0; j < measured.size(); ++j) {
    if (measured[j] < 0 || measured[j] >= full.measurements.cols())
      throw ValidationError("measured component out of range");
    out.measurements.col(static_cast<Eigen::Index>(j)) = full.measurements.col(measured[j]);
  }
  return out;
}

IdentifyOutput identify(const TimeSeriesData& data, const RunConfig& config) {
  const StateSpaceConfig ss = config.state_space();
  IdentifyOutput out;
  out.map = map_estimate(data, ss, config.priors, config.init_psi, config.optimizer);
  if (!std::isfinite(out.map.log_posterior))
    throw NumericalError("hyperparameter search found no finite log posterior");
  out.laplace = laplace_precision(out.map.psi, data, ss, config.priors);
  out.smooth = run_smoother(data, build_state_space(ss, out.map.psi));
  return out;
}

IdentificationSummary summarize(const IdentifyOutput& out) {
  IdentificationSummary s;
  s.psi_hat = out.map.psi;
  s.precision = out.laplace.precision;
  s.covariance = out.laplace.covariance;
  s.laplace_reliable = out.laplace.reliable;
  s.log_marginal = out.smooth.log_marginal;
  s.log_posterior = out.map.log_posterior;
  s.evaluations = out.map.evaluations;
  s.converged = out.map.converged;
  return s;
}

PipelineOutput run_pipeline(const RunConfig& config) {
  PipelineOutput out;
  out.training_truth = simulate(config.training, ConvectionFn::surrogate());
  out.training = synthesize_measurements(config.training, out.training_truth, config.training.noise_var,
                                         config.seed);
  const TimeSeriesData observed = select_measured(out.training, config.measured);
  out.identification = identify(observed, config);
  out.states = extract_states(out.identification.smooth, observed);
  out.regression = regress_components(out.states, config.regression_prior, config.basis);
  out.validation = validate_forward(config.validation, ConvectionFn::identified(out.regression));
  out.baseline = residual_baseline(observed, config.state_space(), config.validation,
                                   config.baseline_process_noise);
  return out;
}

std::filesystem::path CommandPaths::data_path() const {
  return data ? *data : out_dir / "measurements.csv";
}

std::string cmd_simulate(const RunConfig& config, const CommandPaths& paths) {
  ensure_out_dir(paths);
  const Eigen::MatrixXd truth = simulate(config.training, ConvectionFn::surrogate());
  const TimeSeriesData data =
      synthesize_measurements(config.training, truth, config.training.noise_var, config.seed);
  const auto target = paths.data_path();
  write_measurements_csv(target, data);
  std::ostringstream msg;
  msg << "simulate: wrote " << data.size() << " rows (dt = " << format_double(data.dt) << " s, seed "
      << config.seed << ") to " << target.string();
  return msg.str();
}

std::string cmd_identify(const RunConfig& config, const CommandPaths& paths) {
  ensure_out_dir(paths);
  const TimeSeriesData data = load_measurements(config, paths);
  const IdentifyOutput id = identify(data, config);

  ResultsDocument doc = open_results(config, paths);
  doc.identification = summarize(id);
  save_results(paths.results_path(), doc);
  write_csv(paths.out_dir / "smoothed_states.csv", states_table(extract_states(id.smooth, data)));

  std::ostringstream msg;
  const Eigen::Vector2d sd = id.laplace.marginal_std();
  msg << "identify: gamma = " << format_double(id.map.psi.gamma) << " (sd " << format_double(sd(0))
      << "), length = " << format_double(id.map.psi.length) << " (sd " << format_double(sd(1))
      << "), log marginal = " << format_double(id.smooth.log_marginal) << ", " << id.map.evaluations
      << " evaluations";
  if (!id.map.converged) msg << "\nwarning: simplex search hit the evaluation budget before converging";
  if (!id.laplace.reliable) msg << "\nwarning: Laplace precision is not positive definite";
  for (const auto& w : id.smooth.warnings) msg << "\nwarning: " << w;
  return msg.str();
}

std::string cmd_regress(const RunConfig& config, const CommandPaths& paths) {
  ensure_out_dir(paths);
  const Eigen::Index d = config.n_components();
  const auto states_path = paths.out_dir / "smoothed_states.csv";
  if (!std::filesystem::exists(states_path))
    throw ValidationError(states_path.string() + " not found; run identify first");
  const SmoothedStates states = states_from_table(read_csv(states_path), d);
  const auto posts = regress_components(states, config.regression_prior, config.basis);

  ResultsDocument doc = open_results(config, paths);
  doc.regression.clear();
  for (Eigen::Index i = 0; i < d; ++i)
    doc.regression.push_back(RegressionSummary::from(i, posts[static_cast<std::size_t>(i)]));
  save_results(paths.results_path(), doc);

  // Plot-ready r_hat grid over each component's visited range, padded by 25%.
  constexpr int kGrid = 101;
  CsvTable grid;
  grid.header = {"component", "T", "T_a", "rhat_mean", "rhat_std", "extrapolated"};
  grid.values.resize(d * kGrid, 6);
  const double t_a = states.ambient.mean();
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lo = states.temp_mean.col(i).minCoeff();
    const double hi = states.temp_mean.col(i).maxCoeff();
    const double pad = 0.25 * std::max(hi - lo, 1e-6);
    for (int g = 0; g < kGrid; ++g) {
      const double T = (lo - pad) + (hi - lo + 2.0 * pad) * g / (kGrid - 1);
      const auto pred = posterior_predictive(posts[static_cast<std::size_t>(i)], T, t_a);
      grid.values.row(i * kGrid + g) << static_cast<double>(i + 1), T, t_a, pred.mean,
          std::sqrt(pred.variance), (T < lo || T > hi) ? 1.0 : 0.0;
    }
  }
  write_csv(paths.out_dir / "rhat_grid.csv", grid);

  std::ostringstream msg;
  msg << "regress:";
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& p = posts[static_cast<std::size_t>(i)];
    msg << "\n  component " << i + 1 << ": mu = [";
    for (Eigen::Index j = 0; j < p.mu.size(); ++j) msg << (j ? ", " : "") << format_double(p.mu(j));
    msg << "], noise_var = " << format_double(p.noise_var);
    for (const auto& w : p.warnings) msg << "\n  warning: " << w;
  }
  return msg.str();
}

std::string cmd_validate(const RunConfig& config, const CommandPaths& paths) {
  ensure_out_dir(paths);
  ResultsDocument doc = open_results(config, paths);
  if (doc.regression.size() != static_cast<std::size_t>(config.n_components()))
    throw ValidationError(paths.results_path().string() + " has no regression posteriors; run regress first");
  std::vector<PolyRegressionPosterior> posts;
  for (const auto& r : doc.regression) posts.push_back(r.posterior());

  const ValidationResult v = validate_forward(config.validation, ConvectionFn::identified(std::move(posts)));
  doc.gplfm_rmse = v.rmse;
  save_results(paths.results_path(), doc);
  write_csv(paths.out_dir / "validation.csv", trajectory_table(v, config.validation.dt));
  return "validate: GPLFM forward-simulation RMSE = " + format_double(v.rmse) + " degC";
}

std::string cmd_baseline(const RunConfig& config, const CommandPaths& paths) {
  ensure_out_dir(paths);
  const TimeSeriesData data = load_measurements(config, paths);
  const BaselineResult b =
      residual_baseline(data, config.state_space(), config.validation, config.baseline_process_noise);

  ResultsDocument doc = open_results(config, paths);
  doc.baseline = BaselineSummary{b.coefficients, b.validation.rmse};
  save_results(paths.results_path(), doc);

  const Eigen::Index n = data.size();
  const Eigen::Index d = config.n_components();
  const auto p = static_cast<Eigen::Index>(b.components.size());
  CsvTable res;
  res.header = {"t", "T_a"};
  for (Eigen::Index i = 0; i < d; ++i) res.header.push_back(idx_name("T_", i));
  for (Eigen::Index j = 0; j < p; ++j) res.header.push_back(idx_name("residual_", b.components[static_cast<std::size_t>(j)]));
  res.values.resize(n, 2 + d + p);
  for (Eigen::Index k = 0; k < n; ++k) {
    res.values(k, 0) = static_cast<double>(k + 1) * data.dt;
    res.values(k, 1) = data.inputs(k, 0);
    res.values.row(k).segment(2, d) = b.state_estimates.row(k);
    res.values.row(k).tail(p) = b.residuals.row(k);
  }
  write_csv(paths.out_dir / "baseline_residuals.csv", res);
  write_csv(paths.out_dir / "baseline_validation.csv", trajectory_table(b.validation, config.validation.dt));
  return "baseline: residual-fit forward-simulation RMSE = " + format_double(b.validation.rmse) + " degC";
}

}  // namespace heatid
