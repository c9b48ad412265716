// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. All tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatid/config.hpp"
#include "heatid/discretize.hpp"
#include "heatid/pipeline.hpp"
#include "heatid/regression.hpp"
#include "heatid/smoother.hpp"
#include "oracles.hpp"

using namespace heatid;
using Clock = std::chrono::steady_clock;

namespace {

// tolerances
constexpr double kRmseMax = 0.1;
constexpr double kBaselineLo = 0.7, kBaselineHi = 2.8, kContrast = 0.1;
constexpr double kGammaLo = 10.0, kGammaHi = 40.0;
constexpr int kOracleInstances = 100;
constexpr double kOracleLikRel = 1e-8, kOracleMomAbs = 1e-6, kOracleSeconds = 5.0;
constexpr int kGpN = 50;
constexpr double kGpTol = 1e-6;
constexpr double kQRelMax = 0.05;
constexpr double kSeqBatchTol = 1e-8, kOlsTol = 1e-6;
constexpr int kPredictivePoints = 1000;
constexpr double kEigTol = 1e-10;
constexpr double kScaleLo = 2.0 * 0.7, kScaleHi = 2.0 * 1.3;
constexpr double kSupNormMax = 2.0;  // W, over the visited temperature range

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("criterion %d [%s] %s: %s\n", id, pass ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
}

double asym(const Eigen::MatrixXd& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

void criterion_oracle() {
  std::mt19937_64 rng(20240);
  double worst_lik = 0.0, worst_mom = 0.0;
  const auto t0 = Clock::now();
  for (int i = 0; i < kOracleInstances; ++i) {
    const auto inst = oracle::random_instance(rng);
    const auto res = run_smoother(inst.data, inst.sys);
    const auto ref = oracle::joint_gaussian(inst.data, inst.sys);
    worst_lik = std::max(worst_lik, std::abs(res.log_marginal - ref.log_marginal) / std::abs(ref.log_marginal));
    worst_mom = std::max(worst_mom, (res.smoothed_prior.mean - ref.means[0]).cwiseAbs().maxCoeff());
    worst_mom = std::max(worst_mom, (res.smoothed_prior.cov - ref.covs[0]).cwiseAbs().maxCoeff());
    for (std::size_t k = 0; k < res.smoothed.size(); ++k) {
      worst_mom = std::max(worst_mom, (res.smoothed[k].mean - ref.means[k + 1]).cwiseAbs().maxCoeff());
      worst_mom = std::max(worst_mom, (res.smoothed[k].cov - ref.covs[k + 1]).cwiseAbs().maxCoeff());
    }
  }
  const double elapsed = seconds_since(t0);
  report(4, "smoother vs joint Gaussian",
         worst_lik <= kOracleLikRel && worst_mom <= kOracleMomAbs && elapsed < kOracleSeconds,
         fmt("max rel loglik err %.2e", worst_lik) + fmt(", max moment err %.2e", worst_mom) +
             fmt(", %.2f s for 100 instances", elapsed));
}

void criterion_gp() {
  const KernelHyperparams psi{1.7, 4.0};
  const double dt = 0.5, noise = 0.05;
  const auto sde = sde_params(psi);
  DiscreteSystem sys;
  sys.dt = dt;
  sys.A = Eigen::MatrixXd::Constant(1, 1, std::exp(-sde.lambda * dt));
  sys.B = Eigen::MatrixXd::Zero(1, 1);
  sys.Q = Eigen::MatrixXd::Constant(1, 1, psi.gamma * psi.gamma * (1.0 - std::exp(-2.0 * sde.lambda * dt)));
  sys.C = Eigen::MatrixXd::Ones(1, 1);
  sys.R = Eigen::MatrixXd::Constant(1, 1, noise);
  sys.m0 = Eigen::VectorXd::Zero(1);
  sys.S0 = Eigen::MatrixXd::Constant(1, 1, psi.gamma * psi.gamma);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd(0.0, 1.0);
  TimeSeriesData data;
  data.dt = dt;
  data.inputs = Eigen::MatrixXd::Zero(kGpN, 1);
  data.measurements.resize(kGpN, 1);
  Eigen::VectorXd t(kGpN), y(kGpN);
  for (int k = 0; k < kGpN; ++k) {
    t(k) = (k + 1) * dt;
    y(k) = 2.0 * std::sin(0.3 * t(k)) + std::sqrt(noise) * nd(rng);
    data.measurements(k, 0) = y(k);
  }
  const auto res = run_smoother(data, sys);
  const auto ref = oracle::gp_regression(psi, t, y, noise);
  double err = 0.0;
  for (int k = 0; k < kGpN; ++k) {
    err = std::max(err, std::abs(res.smoothed[static_cast<std::size_t>(k)].mean(0) - ref.mean(k)));
    err = std::max(err, std::abs(res.smoothed[static_cast<std::size_t>(k)].cov(0, 0) - ref.var(k)));
  }
  report(5, "state space vs batch GP", err <= kGpTol, fmt("max |mean/var diff| %.2e over N = 50", err));
}

void criterion_q() {
  const auto model = oracle::simulated_rod();
  const auto mats = build_continuous_matrices(model);
  const auto sde = sde_params({1.0, std::sqrt(3.0)});  // lambda = 1
  const auto aug = augment(mats, model, sde);
  std::vector<double> errs;
  for (double dt : {0.01, 0.1, 1.0}) {
    const Eigen::MatrixXd taylor = process_noise_q(dt, sde, model);
    const Eigen::MatrixXd ref = oracle::simpson_q(aug.drift, aug.noise_load, sde.v_c, dt);
    errs.push_back((taylor - ref).norm() / ref.norm());
  }
  const bool pass = errs[0] <= kQRelMax && errs[0] < errs[1] && errs[1] < errs[2];
  report(6, "Taylor Q vs quadrature", pass,
         fmt("rel Frobenius err %.2e", errs[0]) + fmt(" / %.2e", errs[1]) + fmt(" / %.2e", errs[2]) +
             " at lambda*dt = 0.01 / 0.1 / 1");
}

void criterion_conjugacy(const PipelineOutput& run, const RunConfig& cfg) {
  const auto& st = run.states;
  const Eigen::Index n = st.time.size();
  double seq_err = 0.0, ols_err = 0.0, min_margin = 1e300;
  std::mt19937_64 rng(77);
  for (Eigen::Index i = 0; i < st.temp_mean.cols(); ++i) {
    const Eigen::VectorXd T = st.temp_mean.col(i), m = st.gp_mean.col(i);
    const Eigen::VectorXd Ta = st.ambient;
    const double s2 = run.regression[static_cast<std::size_t>(i)].noise_var;
    const std::span<const double> sT(T.data(), n), sTa(Ta.data(), n), sm(m.data(), n);
    const auto batch = fit(sT, sTa, sm, cfg.regression_prior, s2, cfg.basis);
    RegressionPrior prior = cfg.regression_prior;
    const std::size_t chunk = 137;
    for (std::size_t s = 0; s < static_cast<std::size_t>(n); s += chunk) {
      const std::size_t len = std::min(chunk, static_cast<std::size_t>(n) - s);
      const auto part = fit(sT.subspan(s, len), sTa.subspan(s, len), sm.subspan(s, len), prior, s2, cfg.basis);
      prior = {part.mu, part.sigma_cov};
    }
    seq_err = std::max(seq_err, (prior.mean - batch.mu).cwiseAbs().maxCoeff() /
                                    (1.0 + batch.mu.cwiseAbs().maxCoeff()));
    seq_err = std::max(seq_err, (prior.cov - batch.sigma_cov).cwiseAbs().maxCoeff() /
                                    (1.0 + batch.sigma_cov.cwiseAbs().maxCoeff()));

    const auto diffuse = fit(sT, sTa, sm, RegressionPrior::isotropic(cfg.basis.feature_dim(), 1e12), s2, cfg.basis);
    Eigen::MatrixXd X(n, cfg.basis.feature_dim());
    for (Eigen::Index k = 0; k < n; ++k) X.row(k) = cfg.basis.features(T(k), Ta(k)).transpose();
    const Eigen::VectorXd ols = X.colPivHouseholderQr().solve(m);
    ols_err = std::max(ols_err, (diffuse.mu - ols).cwiseAbs().maxCoeff() / (1.0 + ols.cwiseAbs().maxCoeff()));

    std::uniform_real_distribution<double> temp(0.0, 80.0), amb(0.0, 40.0);
    for (int q = 0; q < kPredictivePoints; ++q) {
      const auto pred = posterior_predictive(batch, temp(rng), amb(rng));
      min_margin = std::min(min_margin, pred.variance - batch.noise_var);
    }
  }
  report(7, "regression conjugacy", seq_err <= kSeqBatchTol && ols_err <= kOlsTol && min_margin >= 0.0,
         fmt("seq-vs-batch %.2e", seq_err) + fmt(", diffuse-vs-OLS %.2e", ols_err) +
             fmt(", min(pred var - sigma^2) %.2e", min_margin));
}

void criterion_invariants(const PipelineOutput& run) {
  const auto& sm = run.identification.smooth;
  double worst_asym = 0.0, worst_eig = 1e300, worst_shrink = 1e300;
  const auto visit = [&](const Eigen::MatrixXd& s) {
    worst_asym = std::max(worst_asym, asym(s) / std::max(1.0, s.cwiseAbs().maxCoeff()));
    worst_eig = std::min(worst_eig, min_eig(s));
  };
  for (std::size_t k = 0; k < sm.filtered.size(); ++k) {
    visit(sm.predicted[k].cov);
    visit(sm.filtered[k].cov);
    visit(sm.smoothed[k].cov);
    worst_shrink = std::min(worst_shrink, min_eig(sm.predicted[k].cov - sm.filtered[k].cov));
  }
  const bool pass = worst_asym <= kEigTol && worst_eig >= -kEigTol && worst_shrink >= -kEigTol;
  report(8, "filter covariance invariants", pass,
         fmt("N = %.0f", static_cast<double>(sm.filtered.size())) + fmt(", max asym %.2e", worst_asym) +
             fmt(", min eig %.2e", worst_eig) + fmt(", min eig(P- - P+) %.2e", worst_shrink));
}

void criterion_scaling(const RunConfig& cfg, const KernelHyperparams& psi) {
  const auto series = [&](int n) {
    auto sc = cfg.training;
    sc.n_steps = n;
    const auto traj = simulate(sc, ConvectionFn::surrogate());
    return select_measured(synthesize_measurements(sc, traj, sc.noise_var, cfg.seed), cfg.measured);
  };
  const auto sys = build_state_space(cfg.state_space(), psi);
  const TimeSeriesData small = series(16000), large = series(32000);
  const auto timed = [&](const TimeSeriesData& d) {
    const auto t0 = Clock::now();
    const auto res = run_smoother(d, sys);
    return std::isfinite(res.log_marginal) ? seconds_since(t0) : -1.0;
  };
  timed(small);  // warm-up
  // interleaved repeats so load drift hits both sizes alike; keep the fastest
  double t1 = 1e300, t2 = 1e300;
  for (int rep = 0; rep < 15; ++rep) {
    t1 = std::min(t1, timed(small));
    t2 = std::min(t2, timed(large));
  }
  const double ratio = t2 / t1;
  report(9, "linear scaling in N", t1 > 0.0 && ratio >= kScaleLo && ratio <= kScaleHi,
         fmt("best-of-15 smoother time %.4f s", t1) + fmt(" (N = 16000) -> %.4f s", t2) +
             fmt(" (N = 32000), ratio %.2f", ratio));
}

void supplementary_supnorm(const PipelineOutput& run) {
  // sup |r_hat - r| over the temperatures each component actually visited
  double worst = 0.0;
  for (Eigen::Index i = 0; i < run.states.temp_mean.cols(); ++i) {
    const double lo = run.training_truth.col(i).minCoeff(), hi = run.training_truth.col(i).maxCoeff();
    for (int g = 0; g <= 200; ++g) {
      const double T = lo + (hi - lo) * g / 200.0;
      worst = std::max(worst, std::abs(rhat(run.regression[static_cast<std::size_t>(i)], T, 21.0) -
                                       true_convection_surrogate(T, 21.0)));
    }
  }
  std::printf("supplementary [%s] identified-function sup error over visited range: %.3f W (limit %.1f)\n",
              worst < kSupNormMax ? "PASS" : "FAIL", worst, kSupNormMax);
  if (!(worst < kSupNormMax)) ++failures;
}

}  // namespace

int main() {
  const auto cfg = load_config(std::filesystem::path(HEATID_CONFIG_DIR) / "simulated.json");
  const auto t0 = Clock::now();
  const PipelineOutput run = run_pipeline(cfg);
  const double pipeline_s = seconds_since(t0);

  const double rmse = run.validation.rmse;
  report(1, "simulated-rod reproduction", rmse <= kRmseMax,
         fmt("validation RMSE %.4f", rmse) + fmt(" (limit %.1f)", kRmseMax) + fmt(", pipeline %.1f s", pipeline_s));

  const double base = run.baseline.validation.rmse;
  report(2, "baseline contrast", base >= kBaselineLo && base <= kBaselineHi && rmse <= kContrast * base,
         fmt("baseline RMSE %.3f", base) + fmt(", GPLFM/baseline %.4f", rmse / base));

  const auto& lap = run.identification.laplace;
  const auto& psi = run.identification.map.psi;
  const Eigen::Vector2d sd = lap.marginal_std();
  const double cv_g = sd(0) / psi.gamma, cv_l = sd(1) / psi.length;
  report(3, "hyperparameter posterior shape",
         lap.reliable && psi.gamma >= kGammaLo && psi.gamma <= kGammaHi && cv_g < cv_l,
         fmt("gamma_hat %.3f", psi.gamma) + fmt(" (required [%.0f,", kGammaLo) + fmt(" %.0f])", kGammaHi) +
             fmt(", l_hat %.1f", psi.length) + fmt(", CV gamma %.3f", cv_g) + fmt(" vs CV l %.3f", cv_l));

  criterion_oracle();
  criterion_gp();
  criterion_q();
  criterion_conjugacy(run, cfg);
  criterion_invariants(run);
  criterion_scaling(cfg, psi);
  supplementary_supnorm(run);

  std::printf("%d check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
