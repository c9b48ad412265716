#include "heatid/results.hpp"

#include <fstream>

#include "heatid/errors.hpp"

namespace heatid {

using nlohmann::json;

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename M>
json mat_json(const M& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

Eigen::MatrixXd json_mat(const json& j) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), j.empty() ? 0 : static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = json_vec(j[r]).transpose();
  return m;
}

// JSON has no NaN; unreliable Laplace covariances are stored as null.
json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json mat2_json(const Eigen::Matrix2d& m) {
  return json::array({json::array({number_or_null(m(0, 0)), number_or_null(m(0, 1))}),
                      json::array({number_or_null(m(1, 0)), number_or_null(m(1, 1))})});
}

Eigen::Matrix2d json_mat2(const json& j) {
  Eigen::Matrix2d m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      m(r, c) = j.at(r).at(c).is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at(r).at(c).get<double>();
  return m;
}

}  // namespace

PolyRegressionPosterior RegressionSummary::posterior() const {
  PolyRegressionPosterior p;
  p.mu = mu;
  p.sigma_cov = sigma_cov;
  p.noise_var = noise_var;
  p.basis.order = order;
  return p;
}

RegressionSummary RegressionSummary::from(Eigen::Index component, const PolyRegressionPosterior& post) {
  return {component, post.basis.order, post.mu, post.sigma_cov, post.noise_var};
}

json to_json(const ResultsDocument& doc) {
  json j = json::object();
  if (doc.identification) {
    const auto& id = *doc.identification;
    j["identification"] = {
        {"psi_hat", {{"gamma", id.psi_hat.gamma}, {"length", id.psi_hat.length}}},
        {"laplace",
         {{"precision", mat2_json(id.precision)},
          {"covariance", mat2_json(id.covariance)},
          {"reliable", id.laplace_reliable}}},
        {"log_marginal", id.log_marginal},
        {"log_posterior", id.log_posterior},
        {"evaluations", id.evaluations},
        {"converged", id.converged},
    };
  }
  json reg = json::array();
  for (const auto& r : doc.regression)
    reg.push_back({{"component", r.component + 1},
                   {"order", r.order},
                   {"mu", vec_json(r.mu)},
                   {"sigma", mat_json(r.sigma_cov)},
                   {"noise_var", r.noise_var}});
  j["regression"] = reg;

  json metrics = json::object();
  if (doc.gplfm_rmse) metrics["gplfm_rmse"] = *doc.gplfm_rmse;
  if (doc.baseline) metrics["baseline_rmse"] = doc.baseline->rmse;
  j["metrics"] = metrics;
  if (doc.baseline) {
    json coef = json::array();
    for (const auto& c : doc.baseline->coefficients) coef.push_back(vec_json(c));
    j["baseline"] = {{"coefficients", coef}, {"rmse", doc.baseline->rmse}};
  }
  j["provenance"] = {{"config_hash", doc.provenance.config_hash},
                     {"seed", doc.provenance.seed},
                     {"version", doc.provenance.version}};
  return j;
}

ResultsDocument results_from_json(const json& j) {
  ResultsDocument doc;
  try {
    if (j.contains("identification")) {
      const json& id = j.at("identification");
      IdentificationSummary s;
      s.psi_hat = {id.at("psi_hat").at("gamma").get<double>(), id.at("psi_hat").at("length").get<double>()};
      s.precision = json_mat2(id.at("laplace").at("precision"));
      s.covariance = json_mat2(id.at("laplace").at("covariance"));
      s.laplace_reliable = id.at("laplace").at("reliable").get<bool>();
      s.log_marginal = id.at("log_marginal").get<double>();
      s.log_posterior = id.at("log_posterior").get<double>();
      s.evaluations = id.at("evaluations").get<int>();
      s.converged = id.at("converged").get<bool>();
      doc.identification = s;
    }
    if (j.contains("regression"))
      for (const json& r : j.at("regression"))
        doc.regression.push_back({r.at("component").get<Eigen::Index>() - 1, r.at("order").get<int>(),
                                  json_vec(r.at("mu")), json_mat(r.at("sigma")),
                                  r.at("noise_var").get<double>()});
    if (j.contains("metrics") && j.at("metrics").contains("gplfm_rmse"))
      doc.gplfm_rmse = j.at("metrics").at("gplfm_rmse").get<double>();
    if (j.contains("baseline")) {
      BaselineSummary b;
      for (const json& c : j.at("baseline").at("coefficients")) b.coefficients.push_back(json_vec(c));
      b.rmse = j.at("baseline").at("rmse").get<double>();
      doc.baseline = b;
    }
    if (j.contains("provenance")) {
      const json& p = j.at("provenance");
      doc.provenance.config_hash = p.at("config_hash").get<std::string>();
      doc.provenance.seed = p.at("seed").get<std::uint64_t>();
      doc.provenance.version = p.at("version").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("results document: ") + e.what());
  }
  return doc;
}

ResultsDocument load_results(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return results_from_json(j);
}

void save_results(const std::filesystem::path& path, const ResultsDocument& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << to_json(doc).dump(2) << '\n';
}

}  // namespace heatid
