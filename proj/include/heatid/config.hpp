#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "heatid/discretize.hpp"
#include "heatid/hyperlaplace.hpp"
#include "heatid/regression.hpp"
#include "heatid/simulator.hpp"

namespace heatid {

/// Everything a pipeline run needs, loaded from one JSON document.
/// Component indices in the JSON document are 1-based (matching the CSV
/// column names u_1, y_1, ...); they are 0-based here.
struct RunConfig {
  LumpedThermalModel model;
  double dt = 1.0;

  Eigen::VectorXd m0_temps;
  Eigen::MatrixXd S0_temps;

  std::vector<Eigen::Index> measured;  // components observed by y
  Eigen::MatrixXd R;
  bool allow_dropout = false;

  KernelHyperparams init_psi;
  HyperPriors priors;
  OptimizerOptions optimizer;

  PolyBasis basis;
  RegressionPrior regression_prior;

  SimulationScenario training;
  SimulationScenario validation;
  double baseline_process_noise = 1e-12;

  std::uint64_t seed = 0;
  std::string config_hash;  // SHA-256 of the config text, hex

  [[nodiscard]] Eigen::Index n_components() const { return model.n_components(); }
  /// C = rows of I_D picked by `measured`.
  [[nodiscard]] Eigen::MatrixXd measurement_matrix() const;
  [[nodiscard]] StateSpaceConfig state_space() const;
  /// Overrides the seed everywhere it is used.
  void set_seed(std::uint64_t new_seed);
};

/// Throws ValidationError naming the offending field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(const std::string& text);

}  // namespace heatid
