#ifndef MIMCMC_RNG_HPP
#define MIMCMC_RNG_HPP

#include <cstdint>
#include <random>

#include "mimcmc/multi_index.hpp"

namespace mimcmc {

using Rng = std::mt19937_64;

/// Role of a random stream. Distinct purposes never share a stream.
enum class StreamPurpose : std::uint64_t {
  chain = 1,
  prior_sampling = 2,
  synthetic_data = 3,
  validation = 4,
  normalizer_run = 5,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return mix64(seed ^ mix64(value));
}

/// Stream id for one chain or sampling task. Depends only on its arguments, so a
/// task draws the same numbers whichever worker runs it and in whatever order.
std::uint64_t derive_stream(std::uint64_t experiment_seed, const MultiIndex& alpha,
                            std::uint64_t replicate, StreamPurpose purpose);

inline Rng make_rng(std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace mimcmc

#endif
