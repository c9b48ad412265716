#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatid/config.hpp"
#include "heatid/csv_io.hpp"
#include "heatid/hyperlaplace.hpp"
#include "heatid/regression.hpp"
#include "heatid/results.hpp"
#include "heatid/simulator.hpp"
#include "heatid/smoother.hpp"

namespace heatid {

/// Smoothed marginals split into temperature and GP blocks, k = 1..N.
struct SmoothedStates {
  Eigen::VectorXd time;
  Eigen::VectorXd ambient;
  Eigen::MatrixXd temp_mean;
  Eigen::MatrixXd temp_var;
  Eigen::MatrixXd gp_mean;
  Eigen::MatrixXd gp_var;
};

SmoothedStates extract_states(const SmootherResult& result, const TimeSeriesData& data);
CsvTable states_table(const SmoothedStates& states);
SmoothedStates states_from_table(const CsvTable& table, Eigen::Index n_components);

/// One conjugate fit per component: regressors (m_ik, T_a,k), targets the
/// GP means m_{D+i,k}, noise variance the mean GP-state variance.
std::vector<PolyRegressionPosterior> regress_components(const SmoothedStates& states,
                                                        const RegressionPrior& prior,
                                                        const PolyBasis& basis);

/// Keeps the measurement columns of the measured components.
TimeSeriesData select_measured(const TimeSeriesData& full, const std::vector<Eigen::Index>& measured);

struct IdentifyOutput {
  MapResult map;
  LaplacePosterior laplace;
  SmootherResult smooth;
};

IdentifyOutput identify(const TimeSeriesData& data, const RunConfig& config);
IdentificationSummary summarize(const IdentifyOutput& out);

/// simulate -> identify -> regress -> validate, plus the residual baseline,
/// all in memory.
struct PipelineOutput {
  Eigen::MatrixXd training_truth;
  TimeSeriesData training;  // all D measurement columns
  IdentifyOutput identification;
  SmoothedStates states;
  std::vector<PolyRegressionPosterior> regression;
  ValidationResult validation;
  BaselineResult baseline;
};

PipelineOutput run_pipeline(const RunConfig& config);

struct CommandPaths {
  std::filesystem::path out_dir = ".";
  std::optional<std::filesystem::path> data;  // default <out>/measurements.csv

  [[nodiscard]] std::filesystem::path data_path() const;
  [[nodiscard]] std::filesystem::path results_path() const { return out_dir / "results.json"; }
};

// Each command writes into paths.out_dir and returns a one-paragraph report.
std::string cmd_simulate(const RunConfig& config, const CommandPaths& paths);
std::string cmd_identify(const RunConfig& config, const CommandPaths& paths);
std::string cmd_regress(const RunConfig& config, const CommandPaths& paths);
std::string cmd_validate(const RunConfig& config, const CommandPaths& paths);
std::string cmd_baseline(const RunConfig& config, const CommandPaths& paths);

}  // namespace heatid
