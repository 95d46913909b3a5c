#ifndef MIMCMC_GAUSSIAN_ORACLE_HPP
#define MIMCMC_GAUSSIAN_ORACLE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mimcmc/multi_index.hpp"
#include "mimcmc/spde.hpp"

namespace mimcmc {

/// Mode count standing in for the continuum.
inline constexpr long kDefaultMaxModes = 1L << 15;

struct GaussianSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  [[nodiscard]] Eigen::Index dim() const noexcept { return mean.size(); }
  /// Throws std::domain_error if cov is not square, not symmetric, or has an eigenvalue
  /// below -1e-10 ||cov||.
  void validate() const;
};

struct ModeMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Law of the continuum mode u_k(t): mean e^{(theta - lambda) t} u_{k,0},
/// variance sigma^2 (1 - e^{2 (theta - lambda) t}) / (2 (lambda - theta)).
/// Throws std::domain_error when theta >= lambda = pi^2 k^2.
ModeMoments mode_moments(const ModelParams& params, long k, double t);

/// Law of the exponential-Euler iterate u_{k,n} with step h.
ModeMoments discrete_mode_moments(const ModelParams& params, long k, double step_size, int n);

/// phi(u) = sum_k weights[k-1] u_k(T).
struct LinearQoI {
  std::vector<double> weights;

  static LinearQoI make(QoiKind kind, long max_modes);
};

/// Joint law of (G(u), phi(u)): m values at x = 1/3, m at x = 2/3, then the QoI.
/// Modes are summed in increasing k, one at a time, so the result is reproducible.
GaussianSpec joint_gaussian(const ModelParams& params, long max_modes,
                            const ObservationConfig& observations, const LinearQoI& qoi);

/// Posterior after observing the leading y.size() slots with noise variance tau2,
/// via the information form
///   cov' = (Sigma^{-1} + tau2^{-1} H^T H)^{-1},  mean' = cov' (Sigma^{-1} mean + tau2^{-1} H^T y).
/// Sigma is factorized with a jitter of 1e-12 trace / dim if a plain Cholesky fails; if that
/// still fails the covariance form is used. An infinite tau2 returns the prior.
GaussianSpec condition_on_data(const GaussianSpec& prior, std::span<const double> y, double tau2);

/// mean' = mean + Sigma H^T S^{-1} (y - H mean), cov' = Sigma - Sigma H^T S^{-1} H Sigma,
/// S = H Sigma H^T + tau2 I. Works for singular Sigma.
GaussianSpec condition_on_data_covariance_form(const GaussianSpec& prior, std::span<const double> y,
                                               double tau2);

/// Moments of the last slot.
ModeMoments qoi_moments(const GaussianSpec& spec);

struct SyntheticData {
  std::uint64_t seed = 0;
  long max_modes = 0;
  std::vector<double> truth;      ///< u_k(T), k = 1..max_modes
  std::vector<double> noiseless;  ///< G(u)
  std::vector<double> y;
};

/// Draws each mode exactly at the observation times (Markov transitions of the OU
/// process), evaluates G and adds N(0, tau2 I) noise. Needs a finite tau2.
SyntheticData generate_data(const ModelParams& params, long max_modes,
                            const ObservationConfig& observations, std::uint64_t seed);

/// Joint law of (G(u_alpha), phi_alpha) under the level-alpha exponential-Euler prior.
GaussianSpec discrete_joint(const MultiIndex& alpha, const ModelParams& params, const Bases& bases,
                            const ObservationConfig& observations, QoiKind kind);

/// Exact posterior moments of phi_alpha given y (noise variance observations.tau2).
/// Throws std::invalid_argument for observation times off the level-alpha grid.
ModeMoments discrete_posterior(const MultiIndex& alpha, const ModelParams& params, const Bases& bases,
                               const ObservationConfig& observations, std::span<const double> y,
                               QoiKind kind);

}  // namespace mimcmc

#endif
