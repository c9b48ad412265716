#include <doctest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "heatid/errors.hpp"
#include "heatid/smoother.hpp"
#include "oracles.hpp"

using namespace heatid;

namespace {

DiscreteSystem scalar_system(double a, double b, double q, double c, double r, double m0, double s0) {
  DiscreteSystem s;
  s.A = Eigen::MatrixXd::Constant(1, 1, a);
  s.B = Eigen::MatrixXd::Constant(1, 1, b);
  s.Q = Eigen::MatrixXd::Constant(1, 1, q);
  s.C = Eigen::MatrixXd::Constant(1, 1, c);
  s.R = Eigen::MatrixXd::Constant(1, 1, r);
  s.m0 = Eigen::VectorXd::Constant(1, m0);
  s.S0 = Eigen::MatrixXd::Constant(1, 1, s0);
  return s;
}

GaussianState scalar_state(double m, double v) {
  return {Eigen::VectorXd::Constant(1, m), Eigen::MatrixXd::Constant(1, 1, v)};
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

TimeSeriesData scalar_data(std::initializer_list<double> ys) {
  TimeSeriesData d;
  d.inputs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ys.size()), 1);
  d.measurements.resize(static_cast<Eigen::Index>(ys.size()), 1);
  Eigen::Index k = 0;
  for (double y : ys) d.measurements(k++, 0) = y;
  return d;
}

double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("predict step") {
  SUBCASE("identity dynamics") {
    const auto sys = scalar_system(1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0);
    const auto out = kf_predict(scalar_state(3.0, 2.0), sys, scalar(5.0));
    CHECK(out.mean(0) == 3.0);
    CHECK(out.cov(0, 0) == 2.0);
  }
  SUBCASE("process noise adds to the diagonal") {
    DiscreteSystem sys;
    sys.A = Eigen::MatrixXd::Identity(2, 2);
    sys.B = Eigen::MatrixXd::Zero(2, 1);
    sys.Q = 0.25 * Eigen::MatrixXd::Identity(2, 2);
    GaussianState prev{Eigen::Vector2d(1, 2), Eigen::Matrix2d{{1.0, 0.3}, {0.3, 2.0}}};
    const auto out = kf_predict(prev, sys, scalar(0.0));
    CHECK(out.cov(0, 0) == doctest::Approx(1.25));
    CHECK(out.cov(1, 1) == doctest::Approx(2.25));
    CHECK(out.cov(0, 1) == doctest::Approx(0.3));
  }
  SUBCASE("hand-evaluated scalar") {
    const auto sys = scalar_system(0.5, 1.0, 0.1, 1.0, 1.0, 0.0, 1.0);
    const auto out = kf_predict(scalar_state(2.0, 1.0), sys, scalar(1.0));
    CHECK(out.mean(0) == doctest::Approx(2.0));
    CHECK(out.cov(0, 0) == doctest::Approx(0.35));
  }
}

TEST_CASE("update step") {
  SUBCASE("hand-evaluated scalar") {
    const auto sys = scalar_system(1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0);
    const auto out = kf_update(scalar_state(0.0, 1.0), scalar(2.0), sys);
    CHECK(out.state.mean(0) == doctest::Approx(1.0));
    CHECK(out.state.cov(0, 0) == doctest::Approx(0.5));
    const double expected = -0.5 * std::log(2.0 * std::numbers::pi * 2.0) - 4.0 / 4.0;
    CHECK(out.log_evidence == doctest::Approx(expected));
    CHECK(out.log_evidence == doctest::Approx(-2.2655).epsilon(1e-4));
  }
  SUBCASE("uninformative measurement") {
    const auto sys = scalar_system(1.0, 0.0, 0.0, 1.0, 1e12, 0.0, 1.0);
    const auto out = kf_update(scalar_state(3.0, 2.0), scalar(50.0), sys);
    CHECK(out.state.mean(0) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(out.state.cov(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(out.log_evidence == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi * 1e12)).epsilon(1e-9));
  }
  SUBCASE("exact observation") {
    const auto sys = scalar_system(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0);
    const auto out = kf_update(scalar_state(0.0, 4.0), scalar(7.0), sys);
    CHECK(out.state.mean(0) == doctest::Approx(7.0));
    CHECK(std::abs(out.state.cov(0, 0)) < 1e-12);
  }
  SUBCASE("singular innovation covariance") {
    const auto sys = scalar_system(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(kf_update(scalar_state(0.0, 0.0), scalar(1.0), sys), NumericalError);
  }
  SUBCASE("all-missing measurement skips the correction") {
    const auto sys = scalar_system(1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0);
    const auto out = kf_update(scalar_state(1.5, 2.0), scalar(std::numeric_limits<double>::quiet_NaN()), sys);
    CHECK(out.state.mean(0) == 1.5);
    CHECK(out.log_evidence == 0.0);
  }
}

TEST_CASE("partial dropout uses only the observed rows") {
  DiscreteSystem sys;
  sys.A = Eigen::MatrixXd::Identity(2, 2);
  sys.B = Eigen::MatrixXd::Zero(2, 1);
  sys.Q = Eigen::MatrixXd::Zero(2, 2);
  sys.C = Eigen::MatrixXd::Identity(2, 2);
  sys.R = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  sys.m0 = Eigen::VectorXd::Zero(2);
  sys.S0 = Eigen::MatrixXd::Identity(2, 2);
  GaussianState pred{Eigen::Vector2d(0, 0), Eigen::Matrix2d::Identity()};
  const auto out = kf_update(pred, Eigen::Vector2d(std::numeric_limits<double>::quiet_NaN(), 3.0), sys);
  CHECK(out.state.mean(0) == 0.0);
  CHECK(out.state.mean(1) == doctest::Approx(2.0));
  CHECK(out.state.cov(0, 0) == doctest::Approx(1.0));
  CHECK(out.log_evidence == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi * 1.5) - 9.0 / 3.0));
}

TEST_CASE("RTS smoother on small cases") {
  SUBCASE("single step returns the filtered state") {
    const auto sys = scalar_system(0.9, 0.0, 0.3, 1.0, 1.0, 0.0, 1.0);
    const auto res = run_smoother(scalar_data({1.3}), sys);
    CHECK(res.smoothed.size() == 1);
    CHECK(res.smoothed[0].mean == res.filtered[0].mean);
    CHECK(res.log_marginal == doctest::Approx(kf_update(kf_predict({sys.m0, sys.S0}, sys, scalar(0.0)), scalar(1.3), sys).log_evidence));
  }
  SUBCASE("no temporal coupling leaves filtered states") {
    const auto sys = scalar_system(0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0);
    const auto res = run_smoother(scalar_data({0.5, -1.0, 2.0}), sys);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(res.smoothed[k].mean(0) == doctest::Approx(res.filtered[k].mean(0)));
      CHECK(res.smoothed[k].cov(0, 0) == doctest::Approx(res.filtered[k].cov(0, 0)));
    }
  }
  SUBCASE("two-step random walk") {
    const auto sys = scalar_system(1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0);
    const auto res = run_smoother(scalar_data({0.0, 2.0}), sys);
    CHECK(res.smoothed[0].mean(0) == doctest::Approx(0.5));
    CHECK(res.smoothed[1].mean(0) == doctest::Approx(1.25));
    const auto oracle = oracle::joint_gaussian(scalar_data({0.0, 2.0}), sys);
    CHECK(res.smoothed[0].mean(0) == doctest::Approx(oracle.means[1](0)));
    CHECK(res.smoothed_prior.mean(0) == doctest::Approx(oracle.means[0](0)));
  }
}

TEST_CASE("smoother matches the joint-Gaussian oracle on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracle::random_instance(rng);
    const auto res = run_smoother(inst.data, inst.sys);
    const auto ref = oracle::joint_gaussian(inst.data, inst.sys);
    CHECK(std::abs(res.log_marginal - ref.log_marginal) <= 1e-8 * std::abs(ref.log_marginal));
    CHECK(log_marginal_likelihood(inst.data, inst.sys) == res.log_marginal);
    CHECK((res.smoothed_prior.mean - ref.means[0]).cwiseAbs().maxCoeff() < 1e-6);
    for (std::size_t k = 0; k < res.smoothed.size(); ++k) {
      CHECK((res.smoothed[k].mean - ref.means[k + 1]).cwiseAbs().maxCoeff() < 1e-6);
      CHECK((res.smoothed[k].cov - ref.covs[k + 1]).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("dropout in a series skips those corrections") {
  std::mt19937_64 rng(5);
  auto inst = oracle::random_instance(rng);
  while (inst.data.size() < 3) inst = oracle::random_instance(rng);
  auto holey = inst.data;
  holey.measurements.row(1).setConstant(std::numeric_limits<double>::quiet_NaN());
  const auto res = run_smoother(holey, inst.sys);
  CHECK(res.filtered[1].mean == res.predicted[1].mean);
  CHECK(std::isfinite(res.log_marginal));
}

TEST_CASE("input validation") {
  const auto sys = scalar_system(1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0);
  TimeSeriesData d = scalar_data({1.0, 2.0});
  d.inputs = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(run_smoother(d, sys), ValidationError);
  TimeSeriesData empty;
  empty.inputs.resize(0, 1);
  empty.measurements.resize(0, 1);
  CHECK_THROWS_AS(run_smoother(empty, sys), ValidationError);
}

TEST_CASE("singular-model error names the step") {
  const auto sys = scalar_system(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0);
  try {
    run_smoother(scalar_data({1.0, 1.0}), sys);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}
