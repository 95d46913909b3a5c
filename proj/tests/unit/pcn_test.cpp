#include "mimcmc/pcn.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

namespace mimcmc {
namespace {

CoupledTarget flat_target(const MultiIndex& alpha, int m = 4) {
  const ObservationConfig cfg = ObservationConfig::uniform(m, 1.0, 0.1);
  return CoupledTarget(CoupledSolver(ModelParams{}, Bases{}, corners(alpha), cfg),
                       LikelihoodSpec{std::vector<double>(cfg.size(), 0.0), std::numeric_limits<double>::infinity()});
}

TEST(PcnProposeTest, FullRefreshIgnoresCurrentState) {
  Rng a = make_rng(1);
  Rng b = make_rng(1);
  DrivingNoise x(2, 5);
  DrivingNoise y(2, 5);
  for (double& v : y.values) v = 3.0;
  EXPECT_EQ(pcn_propose(x, 1.0, a).values, pcn_propose(y, 1.0, b).values);
}

TEST(PcnProposeTest, RejectsBadRho) {
  Rng rng = make_rng(1);
  EXPECT_THROW(pcn_propose(DrivingNoise(1, 1), 0.0, rng), std::invalid_argument);
  EXPECT_THROW(pcn_propose(DrivingNoise(1, 1), 1.5, rng), std::invalid_argument);
}

TEST(PcnProposeTest, SmallStepStaysClose) {
  Rng rng = make_rng(2);
  DrivingNoise x(1, 100);
  for (double& v : x.values) v = 1.0;
  for (double v : pcn_propose(x, 1e-10, rng).values) EXPECT_NEAR(v, 1.0, 1e-4);
}

TEST(PcnProposeTest, PreservesStandardNormal) {
  Rng rng = make_rng(3);
  constexpr int kN = 1000000;
  const DrivingNoise x = draw_noise(1, kN, rng);
  const DrivingNoise y = pcn_propose(x, 0.3, rng);
  double sum = 0.0;
  double sq = 0.0;
  for (double v : y.values) {
    sum += v;
    sq += v * v;
  }
  const double mean = sum / kN;
  EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(kN));
  EXPECT_NEAR(sq / kN - mean * mean, 1.0, 4.0 * std::sqrt(2.0 / kN));
}

TEST(MhAcceptTest, Examples) {
  EXPECT_TRUE(mh_accept(-3.0, -3.0, 1.0));
  EXPECT_TRUE(mh_accept(-3.0, -3.0, 1e-300));
  EXPECT_TRUE(mh_accept(-3.0, -1.0, 0.999));
  EXPECT_FALSE(mh_accept(-3.0, -std::numeric_limits<double>::infinity(), 1e-300));
  EXPECT_TRUE(mh_accept(0.0, std::log(0.5), 0.49));
  EXPECT_FALSE(mh_accept(0.0, std::log(0.5), 0.51));
  EXPECT_THROW(mh_accept(NAN, 0.0, 0.5), std::domain_error);
  EXPECT_THROW(mh_accept(0.0, 0.0, 0.0), std::invalid_argument);
}

TEST(TuneRhoTest, KeepsRhoThatAlreadyHitsTarget) {
  int calls = 0;
  const TuneResult r = tune_rho(0.25, [&](double) { ++calls; return 0.5; }, 10);
  EXPECT_EQ(r.rho, 0.25);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(calls, 1);
}

TEST(TuneRhoTest, FlatTargetPushesRhoToOne) {
  const TuneResult r = tune_rho(0.01, [](double) { return 0.99; }, 10);
  EXPECT_EQ(r.rho, 1.0);
  EXPECT_TRUE(r.converged);
}

TEST(TuneRhoTest, BisectsMonotoneAcceptance) {
  // Acceptance 1 / (1 + rho / 1e-3): the band [0.4, 0.6] is rho in [6.7e-4, 1.5e-3].
  const TuneResult r = tune_rho(0.25, [](double rho) { return 1.0 / (1.0 + rho / 1e-3); }, 30);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.rho, 0.25);
  const double acc = 1.0 / (1.0 + r.rho / 1e-3);
  EXPECT_GE(acc, 0.4);
  EXPECT_LE(acc, 0.6);
}

TEST(TuneRhoTest, FallsBackWhenItCannotBracket) {
  const TuneResult r = tune_rho(0.25, [](double) { return 0.0; }, 3);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.rho, 0.25);
  EXPECT_FALSE(r.warning.empty());

  // A step response with no rate inside the band: bracket midpoint.
  const TuneResult s = tune_rho(0.25, [](double rho) { return rho < 0.1 ? 0.9 : 0.1; }, 6);
  EXPECT_FALSE(s.converged);
  EXPECT_TRUE(s.bracketed);
  EXPECT_FALSE(s.warning.empty());
}

TEST(RunChainTest, EmitsExactlyNStepsAndIsDeterministic) {
  const CoupledTarget target = flat_target({1, 1});
  ChainConfig cfg;
  cfg.n_steps = 300;
  cfg.burn_in = 50;
  cfg.seed = 77;
  const ChainRun a = run_chain(target, cfg);
  const ChainRun b = run_chain(target, cfg);
  ASSERT_EQ(a.trace.size(), 300u);
  EXPECT_EQ(a.trace.corners(), 4u);
  for (std::size_t j = 0; j < a.trace.size(); ++j) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(a.trace.phi(j)[c], b.trace.phi(j)[c]);
  }
  EXPECT_EQ(a.stats.burn_in, 50);
}

TEST(RunChainTest, FullRefreshOnFlatTargetAlwaysAccepts) {
  const CoupledTarget target = flat_target({1, 0});
  ChainConfig cfg;
  cfg.rho = 1.0;
  cfg.adapt = false;
  cfg.n_steps = 200;
  cfg.burn_in = 0;
  const ChainRun run = run_chain(target, cfg);
  EXPECT_EQ(run.stats.acceptance_rate, 1.0);
  for (std::size_t j = 0; j < run.trace.size(); ++j) {
    for (double h : run.trace.H(j)) EXPECT_EQ(h, 1.0);
  }
}

TEST(RunChainTest, TuningLandsInBandOnPosterior) {
  const ObservationConfig cfg = ObservationConfig::uniform(20, 1.0, 0.1);
  Rng rng = make_rng(5);
  std::vector<double> y(cfg.size());
  for (double& v : y) v = 0.3 * std::normal_distribution<double>()(rng);
  const CoupledTarget target(CoupledSolver(ModelParams{}, Bases{}, corners({1, 1}), cfg), LikelihoodSpec{y, 0.1});
  ChainConfig chain;
  chain.n_steps = 4000;
  chain.seed = 9;
  const ChainRun run = run_chain(target, chain);
  EXPECT_TRUE(run.stats.tuned);
  EXPECT_TRUE(run.stats.tuning_converged) << run.stats.warning;
  EXPECT_GT(run.stats.acceptance_rate, 0.3);
  EXPECT_LT(run.stats.acceptance_rate, 0.7);
}

TEST(ChainConfigTest, DefaultBurnIn) {
  ChainConfig cfg;
  cfg.n_steps = 100;
  EXPECT_EQ(cfg.effective_burn_in(), 1000);
  cfg.n_steps = 50000;
  EXPECT_EQ(cfg.effective_burn_in(), 5000);
  cfg.burn_in = 0;
  EXPECT_EQ(cfg.effective_burn_in(), 0);
  cfg.rho = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace mimcmc
