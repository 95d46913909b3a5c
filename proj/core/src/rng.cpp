#include "mimcmc/rng.hpp"

namespace mimcmc {

std::uint64_t derive_stream(std::uint64_t experiment_seed, const MultiIndex& alpha,
                            std::uint64_t replicate, StreamPurpose purpose) {
  std::uint64_t h = combine(mix64(experiment_seed), static_cast<std::uint64_t>(purpose));
  h = combine(h, alpha.dim());
  for (int level : alpha.levels()) h = combine(h, static_cast<std::uint64_t>(level));
  return combine(h, replicate);
}

}  // namespace mimcmc
