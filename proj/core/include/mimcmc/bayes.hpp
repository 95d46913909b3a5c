#ifndef MIMCMC_BAYES_HPP
#define MIMCMC_BAYES_HPP

#include <cmath>
#include <span>
#include <vector>

#include "mimcmc/multi_index.hpp"

namespace mimcmc {

/// Gaussian observation model y ~ N(G(u), tau2 I). An infinite tau2 gives a flat
/// likelihood, turning every target below into its prior.
struct LikelihoodSpec {
  std::vector<double> y;
  double tau2 = 0.1;

  [[nodiscard]] bool flat() const noexcept { return std::isinf(tau2); }
};

/// -|y - Gu|^2 / (2 tau2), normalizing constant dropped.
double log_likelihood(const LikelihoodSpec& spec, std::span<const double> predicted);

/// Importance weights of the corners of one coupled state against G = max_i g_i.
struct CornerWeights {
  std::vector<double> log_g;
  double log_G = 0.0;
  std::vector<double> H;  ///< exp(log_g_i - log_G); the largest is exactly 1
};

/// Throws std::domain_error on an empty input or any non-finite log-likelihood.
CornerWeights corner_weights(std::span<const double> log_g);

/// Signed pairwise weighted difference over one coupled state:
///   tilde = sum_i s_i (phi_{2i} H_{2i} - phi_{2i-1} H_{2i-1}),
/// and bar = G * tilde. `bar()` may underflow to zero for poor fits; `log_G` is exact.
struct MultiIncrement {
  double tilde = 0.0;
  double log_G = 0.0;
  [[nodiscard]] double bar() const { return std::exp(log_G) * tilde; }
};

/// Throws std::invalid_argument unless the stencil has an even number (>= 2) of corners
/// matching `phi` and `weights`.
MultiIncrement multi_increment(std::span<const double> phi, const CornerWeights& weights,
                               const CornerSet& stencil);

}  // namespace mimcmc

#endif
