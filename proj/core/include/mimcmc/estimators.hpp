#ifndef MIMCMC_ESTIMATORS_HPP
#define MIMCMC_ESTIMATORS_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mimcmc/multi_index.hpp"
#include "mimcmc/pcn.hpp"
#include "mimcmc/spde.hpp"

namespace mimcmc {

/// Monte Carlo estimate of one mixed difference Delta E_alpha[phi_alpha].
struct IncrementEstimate {
  MultiIndex alpha;
  double value = 0.0;
  std::vector<double> numerators;    ///< per corner: sum_j phi_j H_j
  std::vector<double> denominators;  ///< per corner: sum_j H_j
  std::int64_t n = 0;
  double cost = 0.0;       ///< n * C_alpha work units
  double std_error = 0.0;  ///< batch-means standard error of the linearized estimator
};

/// Ratio-of-sums estimator: sum_i s_i (num_{2i}/den_{2i} - num_{2i-1}/den_{2i-1}).
/// A single-corner stencil gives the plain self-normalized average.
/// Throws std::domain_error on a zero denominator.
IncrementEstimate increment_self_normalized(const ChainTrace& trace, const CornerSet& stencil);

/// Same sum with every denominator replaced by N * normalizers[i], normalizers[i] being
/// E_Pi[H_i]. Throws std::invalid_argument on a non-positive normalizer.
IncrementEstimate increment_simplified(const ChainTrace& trace, const CornerSet& stencil,
                                       std::span<const double> normalizers);

/// Non-overlapping batch means. `batches == 0` picks floor(sqrt(n)). NaN below 4 samples.
double batch_means_std_error(std::span<const double> series, std::size_t batches = 0);

/// K_alpha * M_alpha.
double cost_model(const MultiIndex& alpha, const Bases& bases);

struct AllocationPlan {
  double epsilon = 0.0;
  std::vector<int> max_levels;
  std::vector<MultiIndex> indices;
  std::vector<std::int64_t> samples;
  double predicted_cost = 0.0;
  /// Indices where the unrounded formula fell below one sample.
  std::size_t floored = 0;

  [[nodiscard]] std::int64_t samples_for(const MultiIndex& alpha) const;
};

struct IndexRate {
  MultiIndex alpha;
  double variance = 0.0;
  double cost = 0.0;
};

/// N_alpha = ceil(eps^-2 K (V_alpha / C_alpha)^(1/2)), K = sum_alpha (V_alpha C_alpha)^(1/2).
AllocationPlan allocate_general(double epsilon, std::span<const IndexRate> rates);

/// L_t = ceil(log2(2 / eps)), L_x = 2 L_t, N_alpha = ceil(eps^-2 L_x 2^(-alpha_x - 3 alpha_t / 2)),
/// every N floored at one. Accepts eps in (0, 1].
AllocationPlan allocate_spde(double epsilon, const Bases& bases = {});

/// Time level selected by allocate_spde.
int spde_time_level(double epsilon);

struct LinearFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  double residual_rms = 0.0;
};

/// Ordinary least squares. Throws std::invalid_argument("degenerate design matrix")
/// when the design is rank deficient.
LinearFit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

/// log2(value) ~ -beta_x alpha_x - beta_t alpha_t + intercept.
struct RateFit {
  double beta_x = 0.0;
  double beta_t = 0.0;
  double intercept = 0.0;
  double beta_x_se = 0.0;
  double beta_t_se = 0.0;
  double intercept_se = 0.0;
};

RateFit fit_rates(std::span<const std::pair<MultiIndex, double>> values);

/// log10(y) ~ slope log10(x) + intercept.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

SlopeFit fit_log_log(std::span<const double> x, std::span<const double> y);

/// Empirical Assumption-style rate quantities over a grid of indices.
struct RateRow {
  MultiIndex alpha;
  std::int64_t n = 0;
  double variance = 0.0;  ///< sample variance of the multi-increment
  double abs_mean = 0.0;  ///< |sample mean|, the bias proxy
  double cost = 0.0;      ///< C_alpha
};

struct RateReport {
  std::vector<RateRow> rows;
  RateFit variance_fit;
};

/// Everything an increment chain needs apart from its index, length and seed.
struct MimcmcProblem {
  ModelParams params;
  Bases bases;
  ObservationConfig observations;
  LikelihoodSpec likelihood;
  QoiKind qoi = QoiKind::weighted;
  /// Template for every chain; n_steps and seed are set per index.
  ChainConfig chain;
};

struct IndexRun {
  IncrementEstimate increment;
  ChainStats stats;
  double wall_seconds = 0.0;
};

/// Self-normalized increment at one index from its own chain, seeded by
/// derive_stream(seed, alpha, replicate, chain).
IndexRun run_increment(const MimcmcProblem& problem, const MultiIndex& alpha, std::int64_t n,
                       std::uint64_t seed, std::uint64_t replicate);

/// Plain ergodic average of phi_alpha from a chain targeting pi_alpha (single corner).
IndexRun single_level_mcmc(const MimcmcProblem& problem, const MultiIndex& alpha, std::int64_t n,
                           std::uint64_t seed, std::uint64_t replicate);

struct MimcmcResult {
  double estimate = 0.0;
  double cost = 0.0;              ///< sum_alpha N_alpha C_alpha
  double cost_with_burn_in = 0.0;
  std::vector<IndexRun> runs;     ///< in plan order
};

/// Sum of independent increment estimates over the plan's index set.
MimcmcResult mimcmc_estimate(const MimcmcProblem& problem, const AllocationPlan& plan,
                             std::uint64_t seed, std::uint64_t replicate, unsigned workers = 1);

}  // namespace mimcmc

#endif
