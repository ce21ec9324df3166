#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "logitnet/exact_oracle.hpp"

using namespace logitnet;
using oracle::QuadExpModel;

namespace {

QuadExpModel random_model(std::size_t p, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  QuadExpModel m(p);
  for (auto& t : m.theta) t = g(rng);
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t s = r + 1; s < p; ++s) m.kappa(r, s) = g(rng);
  return m;
}

std::vector<int> random_state(std::size_t p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<int> x(p);
  for (auto& v : x) v = coin(rng);
  return x;
}

// Unnormalised weight computed directly from the model definition.
double direct_weight(const QuadExpModel& m, const std::vector<int>& x) {
  double e = 0.0;
  for (std::size_t r = 0; r < m.p(); ++r) {
    e += x[r] * m.theta[r];
    for (std::size_t s = r + 1; s < m.p(); ++s) e += x[r] * x[s] * m.kappa(r, s);
  }
  return std::exp(e);
}

std::vector<int> state_of(std::uint32_t k, std::size_t p) {
  std::vector<int> x(p);
  for (std::size_t j = 0; j < p; ++j) x[j] = (k >> (p - 1 - j)) & 1u;
  return x;
}

}  // namespace

TEST(ExactOracle, ProbabilitiesSumToOne) {
  std::mt19937_64 rng(1);
  for (std::size_t p = 2; p <= 8; ++p)
    for (int rep = 0; rep < 5; ++rep) {
      const auto m = random_model(p, rng, 1.5);
      const auto prob = oracle::state_probabilities(m);
      double total = 0.0;
      for (double v : prob) total += v;
      EXPECT_NEAR(total, 1.0, 1e-12) << "p=" << p;
    }
}

TEST(ExactOracle, MatchesDirectEnumeration) {
  std::mt19937_64 rng(2);
  const auto m = random_model(4, rng);
  double z = 0.0;
  for (std::uint32_t k = 0; k < 16; ++k) z += direct_weight(m, state_of(k, 4));
  for (std::uint32_t k = 0; k < 16; ++k) {
    const auto x = state_of(k, 4);
    EXPECT_NEAR(oracle::joint_probability(m, x), direct_weight(m, x) / z, 1e-14);
  }
}

TEST(ExactOracle, UniformTwoLocusModel) {
  QuadExpModel m(2);
  for (std::uint32_t k = 0; k < 4; ++k)
    EXPECT_NEAR(oracle::joint_probability(m, state_of(k, 2)), 0.25, 1e-15);
}

TEST(ExactOracle, OddsRatioIsExpKappa) {
  QuadExpModel m(2);
  m.kappa(0, 1) = std::log(4.0);
  const double p11 = oracle::joint_probability(m, std::vector<int>{1, 1});
  const double p00 = oracle::joint_probability(m, std::vector<int>{0, 0});
  const double p10 = oracle::joint_probability(m, std::vector<int>{1, 0});
  const double p01 = oracle::joint_probability(m, std::vector<int>{0, 1});
  EXPECT_NEAR(p11 * p00 / (p10 * p01), 4.0, 1e-12);
}

TEST(ExactOracle, ZeroKappaMeansConditionalIndependence) {
  QuadExpModel m(3);
  m.kappa(0, 1) = 1.0;
  m.kappa(1, 2) = 1.0;
  for (int b = 0; b <= 1; ++b) {
    double pb = 0.0, p1[2] = {0, 0}, p3[2] = {0, 0}, joint[2][2] = {{0, 0}, {0, 0}};
    for (int a = 0; a <= 1; ++a)
      for (int c = 0; c <= 1; ++c) {
        const double v = oracle::joint_probability(m, std::vector<int>{a, b, c});
        pb += v;
        p1[a] += v;
        p3[c] += v;
        joint[a][c] += v;
      }
    for (int a = 0; a <= 1; ++a)
      for (int c = 0; c <= 1; ++c)
        EXPECT_NEAR(joint[a][c] / pb, (p1[a] / pb) * (p3[c] / pb), 1e-12);
  }
}

TEST(ExactOracle, ConditionalLogOddsRatioIsKappaForAnyConditioning) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t p = 2 + rep % 5;
    const auto m = random_model(p, rng);
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t s = r + 1; s < p; ++s)
        for (int c = 0; c < 2; ++c) {
          const auto cond = random_state(p, rng);
          EXPECT_NEAR(oracle::conditional_log_odds_ratio(m, r, s, cond), m.kappa(r, s), 1e-10);
        }
  }
}

TEST(ExactOracle, ConditioningDoesNotChangeTheRatio) {
  QuadExpModel m(3);
  m.kappa(0, 2) = 0.7;
  m.kappa(0, 1) = -0.4;
  const double a = oracle::conditional_log_odds_ratio(m, 0, 2, std::vector<int>{0, 1, 0});
  const double b = oracle::conditional_log_odds_ratio(m, 0, 2, std::vector<int>{0, 0, 0});
  EXPECT_NEAR(a, 0.7, 1e-10);
  EXPECT_NEAR(b, 0.7, 1e-10);
  QuadExpModel independent(3);
  EXPECT_NEAR(oracle::conditional_log_odds_ratio(independent, 0, 1, std::vector<int>{0, 0, 1}),
              0.0, 1e-10);
}

TEST(ExactOracle, RefusesLargeP) {
  QuadExpModel m(21);
  EXPECT_THROW(oracle::joint_probability(m, std::vector<int>(21, 0)), ValidationError);
  EXPECT_THROW(oracle::exact_mle(BinaryMatrix(5, 11)), ValidationError);
}

TEST(ExactMle, TwoByTwoTableGivesLogFour) {
  BinaryMatrix x(6, 2);
  const int rows[6][2] = {{1, 1}, {1, 1}, {1, 0}, {0, 1}, {0, 0}, {0, 0}};
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 2; ++j) x.set(i, j, rows[i][j]);
  const auto res = oracle::exact_mle(x);
  EXPECT_TRUE(res.converged);
  EXPECT_FALSE(res.boundary);
  EXPECT_NEAR(res.model.kappa(0, 1), std::log(4.0), 1e-8);
  EXPECT_LT(res.gradient_max_norm, 1e-8);
}

TEST(ExactMle, BalancedTableGivesZero) {
  BinaryMatrix x(8, 2);
  for (std::size_t i = 0; i < 8; ++i) {
    x.set(i, 0, (i / 2) % 2);
    x.set(i, 1, i % 2);
  }
  const auto res = oracle::exact_mle(x);
  EXPECT_NEAR(res.model.kappa(0, 1), 0.0, 1e-10);
  EXPECT_NEAR(res.model.theta[0], 0.0, 1e-10);
  EXPECT_NEAR(res.model.theta[1], 0.0, 1e-10);
}

TEST(ExactMle, SeparatedDataHitsTheBox) {
  BinaryMatrix x(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    x.set(i, 0, i % 2);
    x.set(i, 1, i % 2);
  }
  const auto res = oracle::exact_mle(x);
  EXPECT_TRUE(res.boundary);
  EXPECT_LE(std::abs(res.model.kappa(0, 1)), oracle::kParameterCap);
}

TEST(ExactMle, RecoversModelWithinThreeStandardErrors) {
  QuadExpModel truth(3);
  truth.theta = {-0.5, 0.3, -0.2};
  truth.kappa(0, 1) = 1.0;
  truth.kappa(1, 2) = -0.8;
  truth.kappa(0, 2) = 0.4;
  std::mt19937_64 rng(11);
  const std::size_t n = 500;
  const auto x = oracle::sample(truth, n, rng);
  const auto fit = oracle::exact_mle(x);
  ASSERT_TRUE(fit.converged);

  // Fisher information n * Cov(features) under the true model.
  const auto prob = oracle::state_probabilities(truth);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(6, 6);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(6);
  for (std::uint32_t k = 0; k < 8; ++k) {
    const auto s = state_of(k, 3);
    Eigen::VectorXd f(6);
    f << s[0], s[1], s[2], s[0] * s[1], s[0] * s[2], s[1] * s[2];
    mean += prob[k] * f;
    second += prob[k] * f * f.transpose();
  }
  const Eigen::MatrixXd info = static_cast<double>(n) * (second - mean * mean.transpose());
  const Eigen::VectorXd se = info.inverse().diagonal().cwiseSqrt();
  const double est[6] = {fit.model.theta[0], fit.model.theta[1], fit.model.theta[2],
                         fit.model.kappa(0, 1), fit.model.kappa(0, 2), fit.model.kappa(1, 2)};
  const double tru[6] = {-0.5, 0.3, -0.2, 1.0, 0.4, -0.8};
  for (int k = 0; k < 6; ++k) EXPECT_LT(std::abs(est[k] - tru[k]), 3.0 * se[k]) << k;
}

TEST(ExactMle, ErrorShrinksWithSampleSize) {
  QuadExpModel truth(3);
  truth.theta = {0.2, -0.4, 0.1};
  truth.kappa(0, 1) = 0.9;
  truth.kappa(1, 2) = 0.5;
  auto error = [&](std::size_t n) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 rng(seed);
      const auto fit = oracle::exact_mle(oracle::sample(truth, n, rng));
      double e = 0.0;
      for (std::size_t r = 0; r < 3; ++r) {
        e = std::max(e, std::abs(fit.model.theta[r] - truth.theta[r]));
        for (std::size_t s = r + 1; s < 3; ++s)
          e = std::max(e, std::abs(fit.model.kappa(r, s) - truth.kappa(r, s)));
      }
      total += e;
    }
    return total / 10.0;
  };
  EXPECT_LT(error(2000), error(200));
}
