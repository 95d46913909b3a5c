#include "mimcmc/gaussian_oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

namespace mimcmc {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(ModeMomentsTest, Examples) {
  ModelParams p;
  const ModeMoments zero = mode_moments(p, 1, 0.0);
  EXPECT_EQ(zero.mean, 1.0);
  EXPECT_EQ(zero.variance, 0.0);

  const ModeMoments one = mode_moments(p, 1, 1.0);
  EXPECT_NEAR(one.mean, 8.52771172826087627e-5, 1e-19);
  EXPECT_NEAR(one.variance, 0.0533640455840135632, 1e-16);

  const ModeMoments late = mode_moments(p, 3, 50.0);
  EXPECT_NEAR(late.variance, 1.0 / (2.0 * (9 * kPi * kPi - 0.5)), 1e-15);

  p.theta = 20.0;
  EXPECT_THROW(mode_moments(p, 1, 1.0), std::domain_error);
}

TEST(DiscreteModeMomentsTest, ConvergesToContinuum) {
  ModelParams p;
  const ModeMoments exact = mode_moments(p, 2, 1.0);
  double previous = INFINITY;
  for (int m : {20, 80, 320, 1280}) {
    const ModeMoments d = discrete_mode_moments(p, 2, 1.0 / m, m);
    const double err = std::abs(d.variance - exact.variance);
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 1e-3 * exact.variance);
}

TEST(LinearQoITest, EvenWeightsVanish) {
  const LinearQoI q = LinearQoI::make(QoiKind::weighted, 64);
  for (std::size_t i = 1; i < q.weights.size(); i += 2) EXPECT_EQ(q.weights[i], 0.0);
  EXPECT_DOUBLE_EQ(q.weights[2], -std::sqrt(2.0) / 3.0);
}

TEST(JointGaussianTest, DeterministicWhenNoiseless) {
  ModelParams p;
  p.sigma = 0.0;
  const ObservationConfig cfg = ObservationConfig::uniform(2, 1.0, 0.1);
  const GaussianSpec g = joint_gaussian(p, 16, cfg, LinearQoI::make(QoiKind::weighted, 16));
  EXPECT_EQ(g.cov.norm(), 0.0);
  double expected = 0.0;
  for (long k = 1; k <= 16; ++k) expected += sine_basis(k, kLeftSite) * std::exp((0.5 - kPi * kPi * k * k) * 0.5);
  EXPECT_NEAR(g.mean(0), expected, 1e-15);
}

TEST(JointGaussianTest, SingleModeSingleTimeByHand) {
  ModelParams p;
  const ObservationConfig cfg{{1.0}, 0.1};
  const GaussianSpec g = joint_gaussian(p, 1, cfg, LinearQoI::make(QoiKind::weighted, 1));
  const ModeMoments mm = mode_moments(p, 1, 1.0);
  const double b[3] = {sine_basis(1, kLeftSite), sine_basis(1, kRightSite), std::sqrt(2.0)};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(g.mean(i), b[i] * mm.mean, 1e-16);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(g.cov(i, j), b[i] * b[j] * mm.variance, 1e-15);
  }
}

TEST(JointGaussianTest, SymmetricAndPositive) {
  const ObservationConfig cfg = ObservationConfig::uniform(20, 1.0, 0.1);
  const GaussianSpec g = joint_gaussian(ModelParams{}, 512, cfg, LinearQoI::make(QoiKind::weighted, 512));
  EXPECT_EQ(g.dim(), 41);
  EXPECT_LE((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NO_THROW(g.validate());
}

TEST(JointGaussianTest, CrossTimeCovarianceMatchesMarkovSampling) {
  ModelParams p;
  const ObservationConfig cfg = ObservationConfig::uniform(2, 1.0, 0.1);
  const GaussianSpec g = joint_gaussian(p, 4, cfg, LinearQoI::make(QoiKind::weighted, 4));
  // Observation slots (0 = x 1/3, t 1/2) and (1 = x 1/3, t 1) of generate_data draws.
  constexpr int kDraws = 40000;
  double s0 = 0, s1 = 0, s01 = 0;
  ObservationConfig exact = cfg;
  exact.tau2 = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const SyntheticData d = generate_data(p, 4, exact, static_cast<std::uint64_t>(i));
    s0 += d.y[0];
    s1 += d.y[1];
    s01 += d.y[0] * d.y[1];
  }
  const double cov = s01 / kDraws - (s0 / kDraws) * (s1 / kDraws);
  const double se = std::sqrt((g.cov(0, 0) * g.cov(1, 1) + g.cov(0, 1) * g.cov(0, 1)) / kDraws);
  EXPECT_NEAR(cov, g.cov(0, 1), 4.0 * se);
}

Eigen::MatrixXd random_spd(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = z(gen);
  }
  return a * a.transpose() / n + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

TEST(ConditionTest, ScalarConjugacy) {
  GaussianSpec prior{Eigen::VectorXd::Constant(1, 2.0), Eigen::MatrixXd::Constant(1, 1, 3.0)};
  const std::vector<double> y{5.0};
  const GaussianSpec post = condition_on_data(prior, y, 0.5);
  EXPECT_NEAR(post.cov(0, 0), 1.0 / (1.0 / 3.0 + 2.0), 1e-15);
  EXPECT_NEAR(post.mean(0), post.cov(0, 0) * (2.0 / 3.0 + 10.0), 1e-14);
}

TEST(ConditionTest, InfiniteNoiseReturnsPrior) {
  std::mt19937_64 gen(1);
  GaussianSpec prior{Eigen::VectorXd::Ones(5), random_spd(5, gen)};
  const std::vector<double> y{1, 2, 3};
  const GaussianSpec post = condition_on_data(prior, y, std::numeric_limits<double>::infinity());
  EXPECT_EQ(post.mean, prior.mean);
  const GaussianSpec nearly = condition_on_data(prior, y, 1e14);
  EXPECT_LT((nearly.mean - prior.mean).norm(), 1e-10);
}

TEST(ConditionTest, InformationAndCovarianceFormsAgree) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> z;
  for (int n : {2, 7, 33, 64}) {
    GaussianSpec prior{Eigen::VectorXd(n), random_spd(n, gen)};
    for (int i = 0; i < n; ++i) prior.mean(i) = z(gen);
    std::vector<double> y(static_cast<std::size_t>(n - 1));
    for (double& v : y) v = z(gen);
    const GaussianSpec a = condition_on_data(prior, y, 0.3);
    const GaussianSpec b = condition_on_data_covariance_form(prior, y, 0.3);
    EXPECT_LE((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-10) << n;
    EXPECT_LE((a.cov - b.cov).cwiseAbs().maxCoeff(), 1e-10) << n;
  }
}

TEST(ConditionTest, SingularPriorFallsBack) {
  GaussianSpec prior{Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Zero(3, 3)};
  prior.cov(0, 0) = prior.cov(0, 2) = prior.cov(2, 0) = prior.cov(2, 2) = 1.0;
  const std::vector<double> y{1.0, 0.0};
  const GaussianSpec post = condition_on_data(prior, y, 1.0);
  EXPECT_NEAR(post.mean(2), 0.5, 1e-12);
}

TEST(GenerateDataTest, NoiselessDecayAndDeterminism) {
  ModelParams p;
  p.sigma = 0.0;
  ObservationConfig cfg = ObservationConfig::uniform(4, 1.0, 0.0);
  const SyntheticData d = generate_data(p, 32, cfg, 1);
  const GaussianSpec g = joint_gaussian(p, 32, cfg, LinearQoI::make(QoiKind::weighted, 32));
  for (std::size_t i = 0; i < d.y.size(); ++i) EXPECT_NEAR(d.y[i], g.mean(static_cast<Eigen::Index>(i)), 1e-15);

  cfg.tau2 = 0.1;
  const SyntheticData a = generate_data(ModelParams{}, 64, cfg, 9);
  const SyntheticData b = generate_data(ModelParams{}, 64, cfg, 9);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_NE(a.y, generate_data(ModelParams{}, 64, cfg, 10).y);
}

TEST(DiscreteJointTest, MatchesModeRecurrence) {
  ModelParams p;
  const ObservationConfig cfg = ObservationConfig::uniform(4, 1.0, 0.1);
  const GaussianSpec g = discrete_joint({0, 0}, p, Bases{1, 20}, cfg, QoiKind::weighted);
  const ModeMoments last = discrete_mode_moments(p, 1, 1.0 / 20, 20);
  EXPECT_NEAR(g.mean(8), std::sqrt(2.0) * last.mean, 1e-16);
  EXPECT_NEAR(g.cov(8, 8), 2.0 * last.variance, 1e-15);
  EXPECT_THROW(discrete_joint({0, 0}, p, Bases{1, 3}, cfg, QoiKind::weighted), std::invalid_argument);
}

TEST(DiscretePosteriorTest, ScalarConjugacyWithOneModeOneTime) {
  ModelParams p;
  ObservationConfig cfg{{1.0}, 0.2};
  const Bases one{1, 10};
  const std::vector<double> y{0.3, -0.1};
  const ModeMoments post = discrete_posterior({0, 0}, p, one, cfg, y, QoiKind::weighted);
  // y_i = b_i u + noise, phi = sqrt(2) u.
  const ModeMoments u = discrete_mode_moments(p, 1, 0.1, 10);
  const double b0 = sine_basis(1, kLeftSite);
  const double b1 = sine_basis(1, kRightSite);
  const double precision = 1.0 / u.variance + (b0 * b0 + b1 * b1) / 0.2;
  const double mean = (u.mean / u.variance + (b0 * y[0] + b1 * y[1]) / 0.2) / precision;
  EXPECT_NEAR(post.mean, std::sqrt(2.0) * mean, 1e-12);
  EXPECT_NEAR(post.variance, 2.0 / precision, 1e-12);

  cfg.tau2 = std::numeric_limits<double>::infinity();
  const ModeMoments prior = discrete_posterior({0, 0}, p, one, cfg, y, QoiKind::weighted);
  EXPECT_NEAR(prior.mean, std::sqrt(2.0) * u.mean, 1e-16);
}

TEST(DiscretePosteriorTest, ApproachesContinuumAlongDiagonal) {
  ModelParams p;
  const ObservationConfig cfg = ObservationConfig::uniform(4, 1.0, 0.1);
  const SyntheticData data = generate_data(p, 256, cfg, 3);
  const GaussianSpec joint = joint_gaussian(p, 4096, cfg, LinearQoI::make(QoiKind::weighted, 4096));
  const double truth = qoi_moments(condition_on_data(joint, data.y, cfg.tau2)).mean;
  double previous = INFINITY;
  for (int level = 0; level <= 4; ++level) {
    const double m = discrete_posterior({2 * level, level}, p, Bases{}, cfg, data.y, QoiKind::weighted).mean;
    const double err = std::abs(m - truth);
    EXPECT_LT(err, previous) << level;
    previous = err;
  }
  EXPECT_LT(previous, 1e-3);
}

}  // namespace
}  // namespace mimcmc
