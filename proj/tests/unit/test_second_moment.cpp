#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mlyap/fixtures.hpp"
#include "mlyap/second_moment.hpp"
#include "oracles.hpp"

using namespace mlyap;

namespace {

MatrixXd sym3() {
  MatrixXd S(3, 3);
  S << 0.4, 0.2, 0.1, 0.2, 0.3, 0.15, 0.1, 0.15, 0.35;
  return S;
}

}  // namespace

TEST(SecondMomentOperator, ApplyMatchesKronecker) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  const MatrixXd S = sym3();
  struct Case {
    NoiseModel m;
    oracle::Kind k;
    MatrixXd A;
    double fq2;
  };
  const MatrixXd A = fixtures::exA();
  const Case cases[] = {
      {NoiseModel::uh(0.05), oracle::Kind::UH, A, 0},
      {NoiseModel::t(0.05), oracle::Kind::T, A, 0},
      {NoiseModel::up(0.6, Distribution::Uniform), oracle::Kind::UP, A, 0.12},
      {NoiseModel::sh(0.05), oracle::Kind::SH, S, 0},
      {NoiseModel::sp(0.6), oracle::Kind::SP, S, 0.36}};
  for (const auto& c : cases) {
    const int n = static_cast<int>(c.A.rows());
    MatrixXd X(n, n);
    for (int i = 0; i < n * n; ++i) X(i) = d(rng);
    const MatrixXd Sig = X * X.transpose();
    const SecondMomentOperator<double> op(c.A, c.m);
    const MatrixXd got = op.apply(Sig);
    const MatrixXd K = oracle::kron_operator(c.k, c.A, c.m.b2, c.fq2);
    Eigen::VectorXd s(n * n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) s(i * n + k) = Sig(i, k);
    const Eigen::VectorXd want = K * s;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        EXPECT_NEAR(got(i, k), want(i * n + k), 1e-12 * want.norm())
            << to_string(c.m.kind);
  }
}

TEST(SecondMomentOperator, Rejections) {
  try {
    SecondMomentOperator<double> op(fixtures::exA(), NoiseModel::sp(0.3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedNoise);
  }
  try {
    SecondMomentOperator<double> op(fixtures::exA(), NoiseModel::sh(0.3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AsymmetricSystem);
  }
  MatrixXd bad = fixtures::exA();
  bad(0, 0) = std::nan("");
  EXPECT_THROW(SecondMomentOperator<double>(bad, NoiseModel::uh(0.1)), Error);
}

TEST(ExactSecondMoment, SeriesMatchesKronecker) {
  const MatrixXd A = fixtures::exA();
  const Eigen::VectorXd x0 = Eigen::VectorXd::LinSpaced(5, 1.0, 2.0);
  const auto got =
      exact_second_moment<double>(A, NoiseModel::uh(0.04), x0, 30);
  const auto want =
      oracle::second_moment_series(oracle::Kind::UH, A, 0.04, x0, 30);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t t = 0; t < got.size(); ++t)
    EXPECT_NEAR(got[t], want[t], 1e-12 * want[t]);
}

TEST(ExactSecondMoment, ScalarCase) {
  MatrixXd a(1, 1);
  a << 0.9;
  Eigen::VectorXd x0(1);
  x0 << 2.0;
  const auto m = exact_second_moment<double>(a, NoiseModel::uh(0.05), x0, 10);
  for (int t = 0; t <= 10; ++t)
    EXPECT_NEAR(m[t], 4.0 * std::pow(0.81 + 0.05, t), 1e-13 * m[t]);
}

TEST(ExactL2, MatchesKroneckerSpectralRadius) {
  const MatrixXd A = fixtures::exA();
  const MatrixXd C = fixtures::crazyA();
  const MatrixXd S = sym3();
  EXPECT_NEAR(exact_L2<double>(A, NoiseModel::uh(0.04)).log_radius,
              oracle::exact_L2(oracle::Kind::UH, A, 0.04), 1e-10);
  EXPECT_NEAR(exact_L2<double>(A, NoiseModel::t(0.01)).log_radius,
              oracle::exact_L2(oracle::Kind::T, A, 0.01), 1e-10);
  EXPECT_NEAR(exact_L2<double>(A, NoiseModel::up(0.5)).log_radius,
              oracle::exact_L2(oracle::Kind::UP, A, 0, 0.25), 1e-10);
  EXPECT_NEAR(exact_L2<double>(S, NoiseModel::sh(0.02)).log_radius,
              oracle::exact_L2(oracle::Kind::SH, S, 0.02), 1e-10);
  EXPECT_NEAR(exact_L2<double>(S, NoiseModel::sp(0.5)).log_radius,
              oracle::exact_L2(oracle::Kind::SP, S, 0, 0.25), 1e-10);
  for (double b2 : {0.04, 0.25, 1.0}) {
    const auto r = exact_L2<double>(C, NoiseModel::uh(b2));
    EXPECT_NEAR(r.log_radius, oracle::exact_L2(oracle::Kind::UH, C, b2), 1e-9);
    EXPECT_TRUE(r.bracketed);
    EXPECT_LE(r.lower, r.upper);
  }
}

TEST(ExactL2, CrazyAValues) {
  const MatrixXd C = fixtures::crazyA();
  EXPECT_NEAR(exact_L2<double>(C, NoiseModel::uh(0.04)).log_radius, 0.255024,
              1e-5);
  EXPECT_NEAR(exact_L2<double>(C, NoiseModel::uh(0.25)).log_radius, 0.832492,
              1e-5);
  EXPECT_NEAR(exact_L2<double>(C, NoiseModel::uh(1.0)).log_radius, 1.79353,
              1e-5);
}

TEST(ExactL2, NoiseOnlyIsExact) {
  const MatrixXd Z = MatrixXd::Zero(4, 4);
  EXPECT_NEAR(exact_L2<double>(Z, NoiseModel::uh(0.3)).log_radius,
              std::log(4 * 0.3), 1e-12);
  EXPECT_NEAR(exact_L2<double>(Z, NoiseModel::t(0.3)).log_radius,
              std::log(16 * 0.3), 1e-12);
}

TEST(ExactL2, NoNoiseGivesLogLambdaSquared) {
  const MatrixXd A = fixtures::exA();
  const auto s = spectral_summary(A, 1);
  EXPECT_NEAR(exact_L2<double>(A, NoiseModel::uh(0)).log_radius,
              std::log(s.lambda * s.lambda), 1e-10);
}

TEST(ExactL2, NilpotentMapReportsMinusInfinity) {
  MatrixXd N = MatrixXd::Zero(3, 3);
  N(0, 1) = 1;
  N(1, 2) = 1;
  EXPECT_TRUE(std::isinf(exact_L2<double>(N, NoiseModel::uh(0)).log_radius));
}

TEST(ExactL2, LongDoubleAgrees) {
  const MatrixXd A = fixtures::exA();
  const Matrix<long double> Al = A.cast<long double>();
  const long double l = exact_L2<long double>(Al, NoiseModel::uh(0.04)).log_radius;
  EXPECT_NEAR(static_cast<double>(l),
              exact_L2<double>(A, NoiseModel::uh(0.04)).log_radius, 1e-11);
}

TEST(ExactL2, IterationCapReportsBracket) {
  PowerIterationOptions opt;
  opt.max_iterations = 2;
  try {
    exact_L2<double>(fixtures::crazyA(), NoiseModel::uh(0.04), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonConvergence);
    EXPECT_NE(std::string(e.what()).find("bracket"), std::string::npos);
  }
}
