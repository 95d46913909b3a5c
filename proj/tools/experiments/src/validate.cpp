#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <random>

#include <Eigen/Dense>

#include "mimcmc/experiments/commands.hpp"
#include "mimcmc/rng.hpp"

namespace mimcmc::experiments {

namespace {

Check check_le(std::string name, double observed, double tolerance) {
  return Check{std::move(name), tolerance, observed, observed <= tolerance};
}

Check telescoping(const ValidationHooks& hooks) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<long> value(-1000000, 1000000);
  std::uniform_int_distribution<int> level(0, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<int> top(1 + static_cast<std::size_t>(trial % 3));
    for (int& l : top) l = level(gen);
    std::map<MultiIndex, long> f;
    for (const MultiIndex& a : enumerate_index_set(top)) f[a] = value(gen);
    long sum = 0;
    for (const MultiIndex& alpha : enumerate_index_set(top)) {
      const CornerSet set = corners(alpha);
      if (set.size() == 1) {
        sum += f.at(alpha);
        continue;
      }
      for (std::size_t i = 0; i < set.pair_count(); ++i) {
        const int s = hooks.pair_sign(set, i);
        sum += s * (f.at(set.corners[2 * i + 1]) - f.at(set.corners[2 * i]));
      }
    }
    worst = std::max(worst, std::abs(static_cast<double>(sum - f.at(MultiIndex(top)))));
  }
  return check_le("telescoping identity (d<=3, L_i<=4)", worst, 0.0);
}

Check coupling_algebra(const ModelParams& params) {
  double worst = 0.0;
  for (double h : {1.0 / 8, 1.0 / 40, 1.0 / 640, 1.0 / 10240}) {
    const auto coeffs = StepCoefficients::make(params, 1 << 10, h);
    for (long k = 1; k <= (1L << 10); ++k) {
      const double v = increment_variance(params, k, h);
      const double d = coeffs.decay[static_cast<std::size_t>(k - 1)];
      const double coarse = increment_variance(params, k, 2 * h);
      if (coarse > 0.0) worst = std::max(worst, std::abs(d * d * v + v - coarse) / coarse);
    }
  }
  return check_le("time-coupling variance identity (rel.)", worst, 1e-12);
}

Check coupling_statistics(const ModelParams& params, std::uint64_t seed, double sigmas) {
  const double h = 1.0 / 8;
  constexpr int kPairs = 100000;
  Rng rng = make_rng(combine(seed, 101));
  const auto coeffs = StepCoefficients::make(params, 1, h);
  const NoiseIncrements coarse = coarsen_time(scale_noise(draw_noise(1, 2 * kPairs, rng), coeffs), params, h);
  double sum = 0.0;
  double sq = 0.0;
  for (double v : coarse.values) {
    sum += v;
    sq += v * v;
  }
  const double var = sq / kPairs - (sum / kPairs) * (sum / kPairs);
  const double exact = increment_variance(params, 1, 2 * h);
  const double z = exact > 0.0 ? std::abs(var - exact) / (exact * std::sqrt(2.0 / kPairs)) : 0.0;
  return check_le("time-coupling variance, 1e5 samples (z)", z, sigmas);
}

Check pcn_invariance(std::uint64_t seed, double sigmas) {
  constexpr int kN = 100000;
  Rng rng = make_rng(combine(seed, 102));
  const DrivingNoise x = draw_noise(1, kN, rng);
  const DrivingNoise y = pcn_propose(x, 0.3, rng);
  double sum = 0.0;
  double sq = 0.0;
  for (double v : y.values) {
    sum += v;
    sq += v * v;
  }
  const double mean = sum / kN;
  const double var = sq / kN - mean * mean;
  const double z = std::max(std::abs(mean) * std::sqrt(kN), std::abs(var - 1.0) / std::sqrt(2.0 / kN));
  return check_le("pCN preserves N(0,I), 1e5 draws (z)", z, sigmas);
}

Check oracle_forms() {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (int n : {3, 16, 41, 64}) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = z(gen);
    }
    GaussianSpec prior{Eigen::VectorXd(n), a * a.transpose() / n + 0.1 * Eigen::MatrixXd::Identity(n, n)};
    for (int i = 0; i < n; ++i) prior.mean(i) = z(gen);
    std::vector<double> y(static_cast<std::size_t>(n - 1));
    for (double& v : y) v = z(gen);
    const GaussianSpec info = condition_on_data(prior, y, 0.1);
    const GaussianSpec cov = condition_on_data_covariance_form(prior, y, 0.1);
    worst = std::max({worst, (info.mean - cov.mean).cwiseAbs().maxCoeff(), (info.cov - cov.cov).cwiseAbs().maxCoeff()});
  }
  return check_le("information vs covariance conditioning", worst, 1e-10);
}

Check estimator_identity(std::uint64_t seed) {
  Rng rng = make_rng(combine(seed, 103));
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(1e-3, 1.0);
  const CornerSet set = corners({2, 2});
  ChainTrace trace(set.size());
  std::vector<double> phi(set.size());
  std::vector<double> H(set.size());
  for (int j = 0; j < 5000; ++j) {
    for (std::size_t c = 0; c < set.size(); ++c) {
      phi[c] = z(rng);
      H[c] = u(rng);
    }
    trace.push({phi, H, true});
  }
  const IncrementEstimate sn = increment_self_normalized(trace, set);
  std::vector<double> normalizers;
  for (double d : sn.denominators) normalizers.push_back(d / static_cast<double>(sn.n));
  const IncrementEstimate simple = increment_simplified(trace, set, normalizers);
  const double ulp = std::abs(std::nextafter(sn.value, INFINITY) - sn.value);
  return check_le("simplified == self-normalized (ulp)", std::abs(simple.value - sn.value) / ulp, 8.0);
}

Check weights_maximum(std::uint64_t seed) {
  Rng rng = make_rng(combine(seed, 104));
  std::uniform_real_distribution<double> u(-700.0, 10.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> lg(1 + static_cast<std::size_t>(trial % 4));
    for (double& v : lg) v = u(rng);
    const CornerWeights w = corner_weights(lg);
    double top = 0.0;
    for (double h : w.H) {
      if (h < 0.0 || h > 1.0) worst = std::max(worst, 1.0);
      top = std::max(top, h);
    }
    worst = std::max(worst, std::abs(top - 1.0));
  }
  return check_le("corner weights in (0,1], max exactly 1", worst, 0.0);
}

Check deterministic_estimator(const ExperimentConfig& config) {
  MimcmcProblem p = config.problem(std::vector<double>(config.observations().size(), 0.0));
  p.params.sigma = 0.0;
  p.likelihood.tau2 = std::numeric_limits<double>::infinity();
  p.chain.rho = 1.0;
  p.chain.adapt = false;
  p.chain.burn_in = 0;
  AllocationPlan plan;
  plan.indices = enumerate_index_set(std::vector<int>{4, 2});
  plan.samples.assign(plan.indices.size(), 2);
  const double sum = mimcmc_estimate(p, plan, config.seed, 0).estimate;
  const Resolution top = Resolution::of({4, 2}, p.bases, p.params.final_time);
  const double phi = qoi(exp_euler_solve(p.params, top, DrivingNoise(top.modes, top.steps)).final_state(), p.qoi);
  return check_le("estimator telescopes when sigma = 0", std::abs(sum - phi), 1e-12);
}

}  // namespace

std::vector<Check> run_validation(const ExperimentConfig& config, const ValidationHooks& hooks) {
  config.validate();
  const double sigmas = config.validate_sigmas;
  return {telescoping(hooks),
          coupling_algebra(config.params),
          coupling_statistics(config.params, config.seed, sigmas),
          pcn_invariance(config.seed, sigmas),
          oracle_forms(),
          estimator_identity(config.seed),
          weights_maximum(config.seed),
          deterministic_estimator(config)};
}

void print_checks(std::ostream& out, const std::vector<Check>& checks) {
  char line[160];
  std::snprintf(line, sizeof line, "%-44s %12s %12s  %s\n", "check", "tolerance", "observed", "result");
  out << line;
  for (const Check& c : checks) {
    std::snprintf(line, sizeof line, "%-44s %12.3g %12.3g  %s\n", c.name.c_str(), c.tolerance, c.observed,
                  c.passed ? "PASS" : "FAIL");
    out << line;
  }
}

int cmd_validate(const ExperimentConfig& config, std::ostream& log) {
  const std::vector<Check> checks = run_validation(config);
  print_checks(log, checks);
  for (const Check& c : checks) {
    if (!c.passed) return 1;
  }
  return 0;
}

}  // namespace mimcmc::experiments
