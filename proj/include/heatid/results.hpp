#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "heatid/gp_sde.hpp"
#include "heatid/regression.hpp"

namespace heatid {

inline constexpr const char* kVersion = "0.1.0";

struct IdentificationSummary {
  KernelHyperparams psi_hat;
  Eigen::Matrix2d precision = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  bool laplace_reliable = false;
  double log_marginal = 0.0;   // log p(y | u; psi_hat)
  double log_posterior = 0.0;  // log_marginal + log prior
  int evaluations = 0;
  bool converged = false;

  bool operator==(const IdentificationSummary&) const = default;
};

struct RegressionSummary {
  Eigen::Index component = 0;
  int order = 3;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma_cov;
  double noise_var = 1.0;

  [[nodiscard]] PolyRegressionPosterior posterior() const;
  static RegressionSummary from(Eigen::Index component, const PolyRegressionPosterior& post);
  bool operator==(const RegressionSummary& o) const {
    return component == o.component && order == o.order && mu == o.mu && sigma_cov == o.sigma_cov &&
           noise_var == o.noise_var;
  }
};

struct BaselineSummary {
  std::vector<Eigen::VectorXd> coefficients;  // per component [c0..c3]
  double rmse = 0.0;

  bool operator==(const BaselineSummary& o) const {
    return coefficients == o.coefficients && rmse == o.rmse;
  }
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = kVersion;

  bool operator==(const Provenance&) const = default;
};

/// Accumulated output of the pipeline commands, persisted as results.json.
struct ResultsDocument {
  std::optional<IdentificationSummary> identification;
  std::vector<RegressionSummary> regression;
  std::optional<double> gplfm_rmse;
  std::optional<BaselineSummary> baseline;
  Provenance provenance;

  bool operator==(const ResultsDocument&) const = default;
};

nlohmann::json to_json(const ResultsDocument& doc);
ResultsDocument results_from_json(const nlohmann::json& j);

/// Missing file gives an empty document.
ResultsDocument load_results(const std::filesystem::path& path);
void save_results(const std::filesystem::path& path, const ResultsDocument& doc);

}  // namespace heatid
