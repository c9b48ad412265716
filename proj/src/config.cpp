#include "heatid/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "heatid/errors.hpp"

namespace heatid {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ValidationError("config: " + field + ": " + what);
}

// Rejects keys that are neither known nor comments (leading '_').
void check_keys(const json& obj, const std::string& where, const std::set<std::string>& known) {
  if (!obj.is_object()) fail(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!key.empty() && key.front() == '_') continue;
    if (!known.contains(key)) fail(where.empty() ? key : where + "." + key, "unknown field");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(where + "." + key, "missing required field");
  return obj.at(key);
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(field, "must be finite");
  return x;
}

double positive(const json& v, const std::string& field) {
  const double x = number(v, field);
  if (!(x > 0.0)) fail(field, "must be > 0");
  return x;
}

Eigen::VectorXd vector(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) fail(field, "expected a non-empty array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = number(v[i], field + "[" + std::to_string(i) + "]");
  return out;
}

Eigen::MatrixXd matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) fail(field, "expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd out;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = vector(v[static_cast<std::size_t>(r)], field + "[" + std::to_string(r) + "]");
    if (r == 0) out.resize(rows, row.size());
    if (row.size() != out.cols()) fail(field, "rows must have equal length");
    out.row(r) = row.transpose();
  }
  return out;
}

Eigen::VectorXd sized_vector(const json& v, const std::string& field, Eigen::Index d) {
  if (v.is_number()) return Eigen::VectorXd::Constant(d, number(v, field));
  Eigen::VectorXd out = vector(v, field);
  if (out.size() != d) fail(field, "expected " + std::to_string(d) + " entries");
  return out;
}

Eigen::Index component_index(const json& v, const std::string& field, Eigen::Index d) {
  if (!v.is_number_integer()) fail(field, "expected an integer component index (1-based)");
  const auto idx = v.get<long long>();
  if (idx < 1 || idx > d) fail(field, "component must be in 1.." + std::to_string(d));
  return static_cast<Eigen::Index>(idx - 1);
}

LumpedThermalModel parse_model(const json& j) {
  const std::string where = "model";
  check_keys(j, where,
             {"heat_capacity", "mass", "specific_heat", "conductance", "link_conductance",
              "h_ambient", "surface_area"});
  LumpedThermalModel m;
  if (j.contains("heat_capacity")) {
    m.heat_capacity = vector(j.at("heat_capacity"), where + ".heat_capacity");
  } else if (j.contains("mass")) {
    const Eigen::VectorXd mass = vector(j.at("mass"), where + ".mass");
    const Eigen::VectorXd cp =
        sized_vector(require(j, "specific_heat", where), where + ".specific_heat", mass.size());
    m.heat_capacity = mass.cwiseProduct(cp);
  } else {
    fail(where + ".heat_capacity", "missing (give heat_capacity or mass + specific_heat)");
  }
  const Eigen::Index d = m.heat_capacity.size();

  if (j.contains("conductance")) {
    m.conductance = matrix(j.at("conductance"), where + ".conductance");
  } else if (j.contains("link_conductance")) {
    const Eigen::VectorXd links = d > 1 ? vector(j.at("link_conductance"), where + ".link_conductance")
                                        : Eigen::VectorXd();
    if (links.size() != d - 1) fail(where + ".link_conductance", "expected D-1 entries");
    m.conductance = chain_conductance(links);
  } else {
    fail(where + ".conductance", "missing (give conductance or link_conductance)");
  }
  m.h_ambient = number(require(j, "h_ambient", where), where + ".h_ambient");
  m.surface_area = sized_vector(require(j, "surface_area", where), where + ".surface_area", d);
  try {
    m.validate();
  } catch (const ValidationError& e) {
    fail(where, e.what());
  }
  return m;
}

AmbientProfile parse_ambient(const json& v, const std::string& field) {
  if (v.is_number()) return AmbientProfile::constant(number(v, field));
  AmbientProfile p;
  if (!v.is_array() || v.empty()) fail(field, "expected a number or [[t, T_a], ...]");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::VectorXd knot = vector(v[i], field + "[" + std::to_string(i) + "]");
    if (knot.size() != 2) fail(field, "knots must be [t, T_a] pairs");
    p.times.push_back(knot(0));
    p.values.push_back(knot(1));
  }
  try {
    p.validate();
  } catch (const ValidationError& e) {
    fail(field, e.what());
  }
  return p;
}

SimulationScenario parse_scenario(const json& j, const std::string& where, const RunConfig& base,
                                  double default_noise) {
  check_keys(j, where, {"T0", "ambient", "heat_input", "n_steps", "noise_var"});
  const Eigen::Index d = base.n_components();
  SimulationScenario s;
  s.model = base.model;
  s.dt = base.dt;
  s.seed = base.seed;
  s.T0 = sized_vector(require(j, "T0", where), where + ".T0", d);
  s.ambient = parse_ambient(require(j, "ambient", where), where + ".ambient");

  const json& n = require(j, "n_steps", where);
  if (!n.is_number_integer() || n.get<long long>() < 1) fail(where + ".n_steps", "must be an integer >= 1");
  s.n_steps = static_cast<int>(n.get<long long>());

  s.noise_var = j.contains("noise_var") ? number(j.at("noise_var"), where + ".noise_var") : default_noise;
  if (s.noise_var < 0.0) fail(where + ".noise_var", "must be >= 0");

  if (j.contains("heat_input")) {
    const json& list = j.at("heat_input");
    if (!list.is_array()) fail(where + ".heat_input", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string f = where + ".heat_input[" + std::to_string(i) + "]";
      check_keys(list[i], f, {"component", "start", "end", "power"});
      HeatPulse p;
      p.component = component_index(require(list[i], "component", f), f + ".component", d);
      p.start = list[i].contains("start") ? number(list[i].at("start"), f + ".start") : 0.0;
      p.end = list[i].contains("end") && !list[i].at("end").is_null()
                  ? number(list[i].at("end"), f + ".end")
                  : std::numeric_limits<double>::infinity();
      p.power = number(require(list[i], "power", f), f + ".power");
      if (p.end < p.start) fail(f, "end must be >= start");
      s.heat_input.push_back(p);
    }
  }
  return s;
}

GammaPrior parse_gamma(const json& j, const std::string& where) {
  check_keys(j, where, {"alpha", "beta"});
  return {positive(require(j, "alpha", where), where + ".alpha"),
          positive(require(j, "beta", where), where + ".beta")};
}

}  // namespace

Eigen::MatrixXd RunConfig::measurement_matrix() const {
  const Eigen::Index d = n_components();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(measured.size()), d);
  for (std::size_t j = 0; j < measured.size(); ++j) c(static_cast<Eigen::Index>(j), measured[j]) = 1.0;
  return c;
}

StateSpaceConfig RunConfig::state_space() const {
  return {model, measurement_matrix(), R, m0_temps, S0_temps, dt};
}

void RunConfig::set_seed(std::uint64_t new_seed) {
  seed = new_seed;
  training.seed = new_seed;
  validation.seed = new_seed;
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, "",
             {"model", "dt", "state_prior", "measurement", "kernel", "regression", "training",
              "validation", "baseline", "seed"});
  RunConfig c;
  c.model = parse_model(require(doc, "model", "<root>"));
  const Eigen::Index d = c.n_components();
  c.dt = positive(require(doc, "dt", "<root>"), "dt");

  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_integer() || s.get<long long>() < 0) fail("seed", "must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }

  {
    const json& j = require(doc, "state_prior", "<root>");
    check_keys(j, "state_prior", {"mean", "cov", "variance"});
    c.m0_temps = sized_vector(require(j, "mean", "state_prior"), "state_prior.mean", d);
    if (j.contains("cov")) {
      c.S0_temps = matrix(j.at("cov"), "state_prior.cov");
      if (c.S0_temps.rows() != d || c.S0_temps.cols() != d) fail("state_prior.cov", "must be DxD");
    } else {
      const Eigen::VectorXd var =
          j.contains("variance") ? sized_vector(j.at("variance"), "state_prior.variance", d)
                                 : Eigen::VectorXd::Ones(d);
      c.S0_temps = var.asDiagonal();
    }
    if (Eigen::LLT<Eigen::MatrixXd>(c.S0_temps).info() != Eigen::Success ||
        !c.S0_temps.isApprox(c.S0_temps.transpose()))
      fail("state_prior.cov", "must be symmetric positive definite");
  }

  double measurement_noise = 0.0;
  {
    const json& j = require(doc, "measurement", "<root>");
    check_keys(j, "measurement", {"components", "noise_var", "R", "allow_dropout"});
    if (j.contains("components")) {
      const json& list = j.at("components");
      if (!list.is_array() || list.empty()) fail("measurement.components", "expected a non-empty array");
      for (std::size_t i = 0; i < list.size(); ++i)
        c.measured.push_back(
            component_index(list[i], "measurement.components[" + std::to_string(i) + "]", d));
    } else {
      for (Eigen::Index i = 0; i < d; ++i) c.measured.push_back(i);
    }
    const auto p = static_cast<Eigen::Index>(c.measured.size());
    if (j.contains("R")) {
      c.R = matrix(j.at("R"), "measurement.R");
      if (c.R.rows() != p || c.R.cols() != p) fail("measurement.R", "must be p x p");
      measurement_noise = c.R.diagonal().mean();
    } else {
      measurement_noise = positive(require(j, "noise_var", "measurement"), "measurement.noise_var");
      c.R = measurement_noise * Eigen::MatrixXd::Identity(p, p);
    }
    if (Eigen::LLT<Eigen::MatrixXd>(c.R).info() != Eigen::Success)
      fail("measurement.R", "must be positive definite");
    if (j.contains("allow_dropout")) {
      if (!j.at("allow_dropout").is_boolean()) fail("measurement.allow_dropout", "expected a boolean");
      c.allow_dropout = j.at("allow_dropout").get<bool>();
    }
  }

  {
    const json& j = require(doc, "kernel", "<root>");
    check_keys(j, "kernel", {"init", "priors", "optimizer"});
    const json& pri = require(j, "priors", "kernel");
    check_keys(pri, "kernel.priors", {"gamma", "length"});
    c.priors.gamma = parse_gamma(require(pri, "gamma", "kernel.priors"), "kernel.priors.gamma");
    c.priors.length = parse_gamma(require(pri, "length", "kernel.priors"), "kernel.priors.length");
    if (j.contains("init")) {
      check_keys(j.at("init"), "kernel.init", {"gamma", "length"});
      c.init_psi.gamma = positive(require(j.at("init"), "gamma", "kernel.init"), "kernel.init.gamma");
      c.init_psi.length = positive(require(j.at("init"), "length", "kernel.init"), "kernel.init.length");
    } else {
      c.init_psi = {c.priors.gamma.mean(), c.priors.length.mean()};
    }
    if (j.contains("optimizer")) {
      const json& o = j.at("optimizer");
      check_keys(o, "kernel.optimizer", {"max_evaluations", "tolerance", "initial_step"});
      if (o.contains("max_evaluations")) {
        if (!o.at("max_evaluations").is_number_integer() || o.at("max_evaluations").get<long long>() < 1)
          fail("kernel.optimizer.max_evaluations", "must be an integer >= 1");
        c.optimizer.max_evaluations = o.at("max_evaluations").get<int>();
      }
      if (o.contains("tolerance")) c.optimizer.tolerance = positive(o.at("tolerance"), "kernel.optimizer.tolerance");
      if (o.contains("initial_step"))
        c.optimizer.initial_step = positive(o.at("initial_step"), "kernel.optimizer.initial_step");
    }
  }

  {
    const json empty = json::object();
    const json& j = doc.contains("regression") ? doc.at("regression") : empty;
    check_keys(j, "regression", {"order", "prior_mean", "prior_cov", "prior_cov_scale"});
    if (j.contains("order")) {
      if (!j.at("order").is_number_integer() || j.at("order").get<long long>() < 1)
        fail("regression.order", "must be an integer >= 1");
      c.basis.order = j.at("order").get<int>();
    }
    const int dim = c.basis.feature_dim();
    const double scale = j.contains("prior_cov_scale") ? positive(j.at("prior_cov_scale"), "regression.prior_cov_scale")
                                                       : 1e3;
    c.regression_prior = RegressionPrior::isotropic(dim, scale);
    if (j.contains("prior_mean"))
      c.regression_prior.mean = sized_vector(j.at("prior_mean"), "regression.prior_mean", dim);
    if (j.contains("prior_cov")) {
      c.regression_prior.cov = matrix(j.at("prior_cov"), "regression.prior_cov");
      if (c.regression_prior.cov.rows() != dim || c.regression_prior.cov.cols() != dim)
        fail("regression.prior_cov", "must be order x order");
    }
    if (Eigen::LLT<Eigen::MatrixXd>(c.regression_prior.cov).info() != Eigen::Success)
      fail("regression.prior_cov", "must be positive definite");
  }

  c.training = parse_scenario(require(doc, "training", "<root>"), "training", c, measurement_noise);
  c.validation = parse_scenario(require(doc, "validation", "<root>"), "validation", c, 0.0);

  if (doc.contains("baseline")) {
    const json& j = doc.at("baseline");
    check_keys(j, "baseline", {"process_noise"});
    if (j.contains("process_noise"))
      c.baseline_process_noise = positive(j.at("process_noise"), "baseline.process_noise");
  }
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig c = parse_config(doc);
  c.config_hash = sha256_hex(text);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace heatid
