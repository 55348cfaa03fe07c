#include <gtest/gtest.h>

#include <cmath>

#include "mlyap/analytic.hpp"
#include "mlyap/dynamics.hpp"
#include "mlyap/fixtures.hpp"
#include "oracles.hpp"

using namespace mlyap;

namespace {

SystemSpec make_system(const MatrixXd& A, const NoiseModel& m) {
  return {A, m, VectorXd::Ones(A.rows())};
}

MomentSeries synthetic_series(double slope, double intercept, int t_max) {
  MomentSeries s;
  s.p_orders = {2};
  s.t_max = t_max;
  s.runs = 1;
  s.flagged_runs.assign(t_max + 1, 0);
  s.log_replicates.assign(1, {});
  for (int t = 0; t <= t_max; ++t) {
    const double y = intercept + slope * t;
    s.log_estimates.push_back({y});
    s.estimates.push_back({std::exp(y)});
    s.stderr_.push_back({0.0});
  }
  return s;
}

}  // namespace

TEST(Simulate, NoiseFreeTrajectoryIsPowerOfA) {
  const auto sys = make_system(fixtures::exA(), NoiseModel::uh(0));
  Engine rng(1);
  const auto tr = simulate_trajectory(sys, 20, rng);
  ASSERT_EQ(tr.states.size(), 21u);
  VectorXd x = sys.x0;
  for (int t = 0; t <= 20; ++t) {
    EXPECT_LE((tr.states[t] - x).norm(), 1e-14 * x.norm());
    x = sys.A * x;
  }
  EXPECT_FALSE(tr.overflow);
}

TEST(Simulate, OverflowIsFlagged) {
  const auto sys = make_system(MatrixXd::Identity(2, 2) * 1e200, NoiseModel::uh(0));
  Engine rng(1);
  const auto tr = simulate_trajectory(sys, 5, rng);
  EXPECT_TRUE(tr.overflow);
  EXPECT_EQ(tr.states.size(), 2u);
}

TEST(Simulate, InputValidation) {
  SystemSpec sys = make_system(fixtures::exA(), NoiseModel::uh(0.1));
  sys.x0 = VectorXd::Ones(3);
  Engine rng(1);
  EXPECT_THROW(simulate_trajectory(sys, 5, rng), Error);
  EXPECT_THROW(estimate_moments(make_system(fixtures::exA(), NoiseModel::uh(0.1)),
                                {2}, 5, 0, 1),
               Error);
  EXPECT_THROW(estimate_moments(make_system(fixtures::exA(), NoiseModel::uh(0.1)),
                                {-1}, 5, 10, 1),
               Error);
  EXPECT_THROW(estimate_moments(make_system(fixtures::exA(), NoiseModel::sh(0.1)),
                                {2}, 5, 10, 1),
               Error);
}

TEST(Moments, NoiseFreeIsExact) {
  const auto sys = make_system(fixtures::exA(), NoiseModel::uh(0));
  const auto s = estimate_moments(sys, {1, 2, 3}, 30, 16, 5);
  VectorXd x = sys.x0;
  for (int t = 0; t <= 30; ++t) {
    for (int k = 0; k < 3; ++k) {
      const double p = s.p_orders[k];
      EXPECT_NEAR(s.log_estimates[t][k], p * std::log(x.norm()), 1e-12);
    }
    x = sys.A * x;
  }
}

TEST(Moments, RescalingKeepsHugeMomentsFinite) {
  const auto sys = make_system(MatrixXd::Identity(3, 3) * 3.0, NoiseModel::uh(0));
  const auto s = estimate_moments(sys, {2}, 1000, 4, 5);
  EXPECT_NEAR(s.log_estimates[1000][0],
              2 * (1000 * std::log(3.0) + 0.5 * std::log(3.0)), 1e-8);
  EXPECT_EQ(s.flagged_runs[1000], 0);
}

TEST(Moments, NoiseOnlySecondMoment) {
  const int n = 4;
  const double b2 = 0.3;
  const auto sys = make_system(MatrixXd::Zero(n, n), NoiseModel::uh(b2));
  const auto s = estimate_moments(sys, {2}, 4, 20000, 17);
  for (int t = 1; t <= 4; ++t) {
    const double want = n * std::pow(n * b2, t);
    EXPECT_NEAR(s.estimates[t][0], want, 5 * s.stderr_[t][0]) << t;
  }
}

TEST(Moments, SecondMomentMatchesExactOperator) {
  const MatrixXd A = fixtures::exA();
  const auto sys = make_system(A, NoiseModel::uh(0.04));
  const auto s = estimate_moments(sys, {2}, 20, 10000, 2024);
  const auto want =
      oracle::second_moment_series(oracle::Kind::UH, A, 0.04, sys.x0, 20);
  for (int t : {1, 5, 10, 20}) {
    EXPECT_NEAR(s.estimates[t][0], want[t], 5 * s.stderr_[t][0]) << t;
    EXPECT_GT(s.stderr_[t][0], 0);
  }
  EXPECT_DOUBLE_EQ(s.estimates[0][0], want[0]);
}

TEST(Moments, ProportionalUniformSecondMoment) {
  const MatrixXd A = fixtures::exA();
  const auto m = NoiseModel::up(0.5, Distribution::Uniform);
  const auto sys = make_system(A, m);
  const auto s = estimate_moments(sys, {2}, 15, 10000, 99);
  const auto want = oracle::second_moment_series(oracle::Kind::UP, A, 0, sys.x0,
                                                 15, 0.25 / 3);
  for (int t : {3, 15})
    EXPECT_NEAR(s.estimates[t][0], want[t], 5 * s.stderr_[t][0]) << t;
}

TEST(Moments, MeanStateFollowsA) {
  const MatrixXd A = fixtures::exA();
  const auto sys = make_system(A, NoiseModel::t(0.01));
  MomentOptions opt;
  opt.track_mean = true;
  opt.bootstrap = 0;
  const auto s = estimate_moments(sys, {2}, 10, 20000, 3, opt);
  ASSERT_EQ(s.mean_state.size(), 11u);
  VectorXd x = sys.x0;
  for (int t = 0; t <= 10; ++t) {
    for (int i = 0; i < 5; ++i) {
      const double tol = std::max(5 * s.mean_stderr[t](i), 1e-12);
      EXPECT_NEAR(s.mean_state[t](i), x(i), tol) << t << " " << i;
    }
    x = A * x;
  }
}

TEST(Moments, SeedDeterminismAcrossThreads) {
  const auto sys = make_system(fixtures::exA(), NoiseModel::uh(0.04));
  MomentOptions one, three;
  one.threads = 1;
  three.threads = 3;
  one.bootstrap = three.bootstrap = 20;
  const auto a = estimate_moments(sys, {1, 2}, 15, 3000, 77, one);
  const auto b = estimate_moments(sys, {1, 2}, 15, 3000, 77, three);
  EXPECT_EQ(a.log_estimates, b.log_estimates);
  EXPECT_EQ(a.stderr_, b.stderr_);
  EXPECT_EQ(a.log_replicates, b.log_replicates);
  const auto c = estimate_moments(sys, {1, 2}, 15, 3000, 78, one);
  EXPECT_NE(a.log_estimates, c.log_estimates);
}

TEST(Moments, RunsArePrefixStable) {
  // run r always draws from the same stream, so a longer ensemble extends a
  // shorter one
  const auto sys = make_system(fixtures::exA(), NoiseModel::uh(0.04));
  MomentOptions opt;
  opt.bootstrap = 0;
  const auto a = estimate_moments(sys, {2}, 3, 1, 5, opt);
  Engine rng = make_engine(5, "dynamics.run", 0);
  const auto tr = simulate_trajectory(sys, 3, rng);
  for (int t = 0; t <= 3; ++t)
    EXPECT_NEAR(a.log_estimates[t][0], 2 * std::log(tr.states[t].norm()), 1e-12);
}

TEST(Fit, SyntheticSlopeIsRecovered) {
  const auto s = synthetic_series(0.1, 2.0, 40);
  const auto f = fit_lyapunov(s, 2, 5, 40);
  EXPECT_NEAR(f.L, 0.1, 1e-12);
  EXPECT_NEAR(f.ci, 0.0, 1e-12);
  EXPECT_FALSE(f.caveat.empty());  // positive exponent
  const auto g = fit_lyapunov(synthetic_series(-0.3, 1.0, 40), 2, 0, 40, -0.5);
  EXPECT_NEAR(g.L, 0.2, 1e-12);
  EXPECT_TRUE(g.caveat.empty());
}

TEST(Fit, DegenerateWindows) {
  auto s = synthetic_series(0.1, 2.0, 40);
  auto expect_code = [&](int lo, int hi, ErrorCode code) {
    try {
      fit_lyapunov(s, 2, lo, hi);
      FAIL() << lo << " " << hi;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code);
    }
  };
  expect_code(5, 8, ErrorCode::DegenerateWindow);
  expect_code(30, 41, ErrorCode::DegenerateWindow);
  s.flagged_runs[10] = 1;
  expect_code(5, 20, ErrorCode::DegenerateWindow);
  s.flagged_runs[10] = 0;
  s.log_estimates[12][0] = -std::numeric_limits<double>::infinity();
  expect_code(5, 20, ErrorCode::DegenerateWindow);
  EXPECT_THROW(fit_lyapunov(s, 3, 0, 10), Error);
}

TEST(Fit, ScalarSystemAgreesWithClosedForm) {
  MatrixXd a(1, 1);
  a << 0.9;
  const auto sys = make_system(a, NoiseModel::uh(0.05));
  const auto s = estimate_moments(sys, {2}, 40, 20000, 11);
  const auto f = fit_lyapunov(s, 2, 5, 40);
  EXPECT_GT(f.ci, 0);
  EXPECT_NEAR(f.L, oracle::scalar_L2(0.9, 0.05), 1.5 * f.ci);
}

TEST(Histogram, LogNormalSpreadNearPrediction) {
  const auto sys = make_system(fixtures::exA(), NoiseModel::uh(0.002));
  const auto h = log_state_histogram(sys, 50, 5000, 8);
  EXPECT_EQ(h.sign_flips, 0);
  EXPECT_EQ(h.samples.size(), 5000u);
  EXPECT_NEAR(h.sd, h.predicted_sd, 0.1 * h.predicted_sd);
  EXPECT_NEAR(h.mean, h.predicted_mean, 0.2 * h.predicted_sd);
  EXPECT_EQ(h.samples, log_state_histogram(sys, 50, 5000, 8).samples);
}

TEST(Histogram, RejectsNonPositiveExpectation) {
  SystemSpec sys = make_system(fixtures::exA(), NoiseModel::uh(0.002));
  sys.x0 = -sys.x0;
  EXPECT_THROW(log_state_histogram(sys, 5, 10, 1), Error);
}
