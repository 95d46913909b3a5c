#include "mimcmc/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/QR>

#include "mimcmc/parallel.hpp"
#include "mimcmc/rng.hpp"

namespace mimcmc {

namespace {

void check_trace(const ChainTrace& trace, const CornerSet& stencil) {
  if (trace.size() == 0) throw std::invalid_argument("increment estimate needs at least one record");
  if (trace.corners() != stencil.size()) {
    throw std::invalid_argument("trace corner count does not match the stencil");
  }
}

void accumulate_sums(const ChainTrace& trace, IncrementEstimate& out) {
  const std::size_t k = trace.corners();
  out.numerators.assign(k, 0.0);
  out.denominators.assign(k, 0.0);
  for (std::size_t j = 0; j < trace.size(); ++j) {
    const auto phi = trace.phi(j);
    const auto H = trace.H(j);
    for (std::size_t i = 0; i < k; ++i) {
      out.numerators[i] += phi[i] * H[i];
      out.denominators[i] += H[i];
    }
  }
  out.n = static_cast<std::int64_t>(trace.size());
}

// Combines per-corner ratios with the stencil's pair signs.
double combine(const CornerSet& stencil, const std::vector<double>& ratios) {
  if (stencil.size() == 1) return ratios[0];
  double value = 0.0;
  for (std::size_t i = 0; i < stencil.pair_count(); ++i) {
    value += pair_sign(stencil, i) * (ratios[2 * i + 1] - ratios[2 * i]);
  }
  return value;
}

}  // namespace

IncrementEstimate increment_self_normalized(const ChainTrace& trace, const CornerSet& stencil) {
  check_trace(trace, stencil);
  IncrementEstimate out;
  out.alpha = stencil.base;
  accumulate_sums(trace, out);
  const std::size_t k = trace.corners();
  const double n = static_cast<double>(out.n);
  std::vector<double> ratios(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (out.denominators[i] == 0.0) throw std::domain_error("self-normalized estimator: zero denominator");
    // Ratio of sample means, so the simplified form with z_i = den_i / n reproduces it exactly.
    ratios[i] = (out.numerators[i] / n) / (out.denominators[i] / n);
  }
  out.value = combine(stencil, ratios);

  const std::vector<int> coeffs = stencil.coefficients();
  std::vector<double> influence(trace.size());
  for (std::size_t j = 0; j < trace.size(); ++j) {
    const auto phi = trace.phi(j);
    const auto H = trace.H(j);
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double mean_h = out.denominators[i] / n;
      z += coeffs[i] * H[i] * (phi[i] - ratios[i]) / mean_h;
    }
    influence[j] = z;
  }
  out.std_error = batch_means_std_error(influence);
  return out;
}

IncrementEstimate increment_simplified(const ChainTrace& trace, const CornerSet& stencil,
                                       std::span<const double> normalizers) {
  check_trace(trace, stencil);
  if (normalizers.size() != stencil.size()) throw std::invalid_argument("one normalizer per corner required");
  for (double z : normalizers) {
    if (!(z > 0.0)) throw std::invalid_argument("normalizers must be positive");
  }
  IncrementEstimate out;
  out.alpha = stencil.base;
  accumulate_sums(trace, out);
  const std::size_t k = trace.corners();
  const double n = static_cast<double>(out.n);
  std::vector<double> ratios(k);
  for (std::size_t i = 0; i < k; ++i) ratios[i] = (out.numerators[i] / n) / normalizers[i];
  out.value = combine(stencil, ratios);

  const std::vector<int> coeffs = stencil.coefficients();
  std::vector<double> terms(trace.size());
  for (std::size_t j = 0; j < trace.size(); ++j) {
    const auto phi = trace.phi(j);
    const auto H = trace.H(j);
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) z += coeffs[i] * phi[i] * H[i] / normalizers[i];
    terms[j] = z;
  }
  out.std_error = batch_means_std_error(terms);
  return out;
}

double batch_means_std_error(std::span<const double> series, std::size_t batches) {
  const std::size_t n = series.size();
  if (n < 4) return std::numeric_limits<double>::quiet_NaN();
  if (batches == 0) batches = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  batches = std::clamp<std::size_t>(batches, 2, n / 2);
  const std::size_t size = n / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const auto first = series.begin() + static_cast<std::ptrdiff_t>(b * size);
    means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) / static_cast<double>(size);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var_of_mean = ss / static_cast<double>(batches - 1) / static_cast<double>(batches);
  return std::sqrt(var_of_mean);
}

double cost_model(const MultiIndex& alpha, const Bases& bases) {
  const Resolution res = Resolution::of(alpha, bases, 1.0);
  return static_cast<double>(res.modes) * static_cast<double>(res.steps);
}

std::int64_t AllocationPlan::samples_for(const MultiIndex& alpha) const {
  const auto it = std::find(indices.begin(), indices.end(), alpha);
  if (it == indices.end()) throw std::out_of_range("index not in allocation plan: " + alpha.to_string());
  return samples[static_cast<std::size_t>(it - indices.begin())];
}

AllocationPlan allocate_general(double epsilon, std::span<const IndexRate> rates) {
  if (rates.empty()) throw std::invalid_argument("allocation needs a non-empty index set");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  double k_sum = 0.0;
  for (const IndexRate& r : rates) {
    if (!(r.variance > 0.0) || !(r.cost > 0.0)) {
      throw std::invalid_argument("allocation needs positive variances and costs");
    }
    k_sum += std::sqrt(r.variance * r.cost);
  }
  const double inv = 1.0 / epsilon;
  AllocationPlan plan;
  plan.epsilon = epsilon;
  plan.max_levels.assign(rates.front().alpha.dim(), 0);
  for (const IndexRate& r : rates) {
    const double raw = inv * inv * k_sum * std::sqrt(r.variance / r.cost);
    if (raw < 1.0) ++plan.floored;
    const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw)));
    plan.indices.push_back(r.alpha);
    plan.samples.push_back(n);
    plan.predicted_cost += static_cast<double>(n) * r.cost;
    for (std::size_t j = 0; j < r.alpha.dim(); ++j) {
      plan.max_levels[j] = std::max(plan.max_levels[j], r.alpha[j]);
    }
  }
  return plan;
}

int spde_time_level(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  return static_cast<int>(std::ceil(std::log2(2.0 / epsilon)));
}

AllocationPlan allocate_spde(double epsilon, const Bases& bases) {
  const int level_t = spde_time_level(epsilon);
  const int level_x = 2 * level_t;
  const double inv = 1.0 / epsilon;
  AllocationPlan plan;
  plan.epsilon = epsilon;
  plan.max_levels = {level_x, level_t};
  plan.indices = enumerate_index_set(plan.max_levels);
  for (const MultiIndex& alpha : plan.indices) {
    const double raw = inv * inv * level_x * std::exp2(-alpha[0] - 1.5 * alpha[1]);
    if (raw < 1.0) ++plan.floored;
    const auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw)));
    plan.samples.push_back(n);
    plan.predicted_cost += static_cast<double>(n) * cost_model(alpha, bases);
  }
  return plan;
}

LinearFit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  if (design.rows() != response.size()) throw std::invalid_argument("least_squares: size mismatch");
  const Eigen::Index p = design.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (design.rows() < p || qr.rank() < p) throw std::invalid_argument("degenerate design matrix");
  LinearFit fit;
  fit.coefficients = qr.solve(response);
  const Eigen::VectorXd residual = response - design * fit.coefficients;
  const double rss = residual.squaredNorm();
  fit.residual_rms = std::sqrt(rss / static_cast<double>(design.rows()));
  const Eigen::Index dof = design.rows() - p;
  const Eigen::MatrixXd gram_inv =
      (design.transpose() * design).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  const double s2 = dof > 0 ? rss / static_cast<double>(dof) : std::numeric_limits<double>::quiet_NaN();
  fit.std_errors = (s2 * gram_inv.diagonal()).cwiseSqrt();
  return fit;
}

RateFit fit_rates(std::span<const std::pair<MultiIndex, double>> values) {
  Eigen::MatrixXd design(static_cast<Eigen::Index>(values.size()), 3);
  Eigen::VectorXd response(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& [alpha, v] = values[i];
    if (alpha.dim() != 2) throw std::invalid_argument("fit_rates expects (alpha_x, alpha_t) indices");
    if (!(v > 0.0)) throw std::invalid_argument("fit_rates needs positive values");
    const auto row = static_cast<Eigen::Index>(i);
    design(row, 0) = alpha[0];
    design(row, 1) = alpha[1];
    design(row, 2) = 1.0;
    response(row) = std::log2(v);
  }
  const LinearFit fit = least_squares(design, response);
  RateFit out;
  out.beta_x = -fit.coefficients(0);
  out.beta_t = -fit.coefficients(1);
  out.intercept = fit.coefficients(2);
  out.beta_x_se = fit.std_errors(0);
  out.beta_t_se = fit.std_errors(1);
  out.intercept_se = fit.std_errors(2);
  return out;
}

SlopeFit fit_log_log(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_log_log: size mismatch");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(x.size()), 2);
  Eigen::VectorXd response(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_log_log needs positive data");
    const auto row = static_cast<Eigen::Index>(i);
    design(row, 0) = std::log10(x[i]);
    design(row, 1) = 1.0;
    response(row) = std::log10(y[i]);
  }
  const LinearFit fit = least_squares(design, response);
  return SlopeFit{fit.coefficients(0), fit.coefficients(1), fit.std_errors(0)};
}

namespace {

IndexRun run_stencil(const MimcmcProblem& problem, CornerSet stencil, std::int64_t n,
                     std::uint64_t seed, std::uint64_t replicate) {
  const auto start = std::chrono::steady_clock::now();
  const MultiIndex alpha = stencil.base;
  CoupledSolver solver(problem.params, problem.bases, stencil, problem.observations, problem.qoi);
  CoupledTarget target(std::move(solver), problem.likelihood);
  ChainConfig config = problem.chain;
  config.n_steps = n;
  config.seed = derive_stream(seed, alpha, replicate, StreamPurpose::chain);
  ChainRun run = run_chain(target, config);
  IndexRun out;
  out.increment = increment_self_normalized(run.trace, stencil);
  out.increment.cost = static_cast<double>(n) * target.step_cost();
  out.stats = std::move(run.stats);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

IndexRun run_increment(const MimcmcProblem& problem, const MultiIndex& alpha, std::int64_t n,
                       std::uint64_t seed, std::uint64_t replicate) {
  return run_stencil(problem, corners(alpha), n, seed, replicate);
}

IndexRun single_level_mcmc(const MimcmcProblem& problem, const MultiIndex& alpha, std::int64_t n,
                           std::uint64_t seed, std::uint64_t replicate) {
  return run_stencil(problem, single_corner(alpha), n, seed, replicate);
}

MimcmcResult mimcmc_estimate(const MimcmcProblem& problem, const AllocationPlan& plan,
                             std::uint64_t seed, std::uint64_t replicate, unsigned workers) {
  if (plan.indices.empty()) throw std::invalid_argument("empty allocation plan");
  MimcmcResult out;
  out.runs.resize(plan.indices.size());
  parallel_for(plan.indices.size(), workers, [&](std::size_t i) {
    out.runs[i] = run_increment(problem, plan.indices[i], plan.samples[i], seed, replicate);
  });
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    const IndexRun& run = out.runs[i];
    out.estimate += run.increment.value;
    out.cost += run.increment.cost;
    const double per_step = cost_model(plan.indices[i], problem.bases);
    out.cost_with_burn_in += run.increment.cost + static_cast<double>(run.stats.burn_in) * per_step;
  }
  return out;
}

}  // namespace mimcmc
