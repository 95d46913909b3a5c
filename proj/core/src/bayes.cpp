#include "mimcmc/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mimcmc {

double log_likelihood(const LikelihoodSpec& spec, std::span<const double> predicted) {
  if (predicted.size() != spec.y.size()) {
    throw std::invalid_argument("log_likelihood: dimension mismatch");
  }
  if (spec.flat()) return 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double r = spec.y[i] - predicted[i];
    sq += r * r;
  }
  return -sq / (2.0 * spec.tau2);
}

CornerWeights corner_weights(std::span<const double> log_g) {
  if (log_g.empty()) throw std::domain_error("corner_weights: no corners");
  for (double v : log_g) {
    if (!std::isfinite(v)) throw std::domain_error("corner_weights: non-finite log-likelihood");
  }
  CornerWeights out;
  out.log_g.assign(log_g.begin(), log_g.end());
  out.log_G = *std::max_element(log_g.begin(), log_g.end());
  out.H.reserve(log_g.size());
  for (double v : log_g) out.H.push_back(std::exp(v - out.log_G));
  return out;
}

MultiIncrement multi_increment(std::span<const double> phi, const CornerWeights& weights,
                               const CornerSet& stencil) {
  const std::size_t k = stencil.size();
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("multi_increment: odd corner count");
  if (phi.size() != k || weights.H.size() != k) {
    throw std::invalid_argument("multi_increment: corner count mismatch");
  }
  MultiIncrement out;
  out.log_G = weights.log_G;
  for (std::size_t i = 0; i < stencil.pair_count(); ++i) {
    const double upper = phi[2 * i + 1] * weights.H[2 * i + 1];
    const double lower = phi[2 * i] * weights.H[2 * i];
    out.tilde += pair_sign(stencil, i) * (upper - lower);
  }
  return out;
}

}  // namespace mimcmc
