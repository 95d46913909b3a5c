#include "mimcmc/multi_index.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mimcmc {

MultiIndex::MultiIndex(std::vector<int> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) {
    throw std::invalid_argument("multi-index must have at least one dimension");
  }
  if (std::any_of(levels_.begin(), levels_.end(), [](int v) { return v < 0; })) {
    throw std::invalid_argument("multi-index entries must be non-negative");
  }
}

MultiIndex::MultiIndex(std::initializer_list<int> levels)
    : MultiIndex(std::vector<int>(levels)) {}

bool MultiIndex::is_origin() const noexcept {
  return std::all_of(levels_.begin(), levels_.end(), [](int v) { return v == 0; });
}

int MultiIndex::active_count() const noexcept {
  return static_cast<int>(
      std::count_if(levels_.begin(), levels_.end(), [](int v) { return v > 0; }));
}

MultiIndex MultiIndex::decremented(std::size_t i) const {
  if (levels_.at(i) == 0) {
    throw std::invalid_argument("cannot lower a zero level");
  }
  auto copy = levels_;
  --copy[i];
  return MultiIndex(std::move(copy));
}

int MultiIndex::total() const noexcept {
  return std::accumulate(levels_.begin(), levels_.end(), 0);
}

std::string MultiIndex::to_string() const {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (i > 0) out << ',';
    out << levels_[i];
  }
  out << ')';
  return out.str();
}

std::vector<MultiIndex> enumerate_index_set(std::span<const int> max_levels) {
  if (max_levels.empty()) {
    throw std::invalid_argument("index set needs at least one dimension");
  }
  if (std::any_of(max_levels.begin(), max_levels.end(), [](int v) { return v < 0; })) {
    throw std::invalid_argument("maximum levels must be non-negative");
  }
  std::vector<MultiIndex> out;
  std::vector<int> current(max_levels.size(), 0);
  while (true) {
    out.emplace_back(current);
    // odometer with the last dimension running fastest
    std::size_t pos = current.size();
    while (pos > 0) {
      --pos;
      if (current[pos] < max_levels[pos]) {
        ++current[pos];
        std::fill(current.begin() + static_cast<std::ptrdiff_t>(pos) + 1, current.end(), 0);
        break;
      }
      if (pos == 0) return out;
    }
  }
}

CornerSet corners(const MultiIndex& alpha) {
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < alpha.dim(); ++j) {
    if (alpha[j] > 0) active.push_back(j);
  }
  CornerSet out{alpha, {}};
  const std::size_t count = std::size_t{1} << active.size();
  out.corners.reserve(count);
  // Bit b of the mask keeps active dimension b at full level; a cleared bit lowers it.
  // Active dimensions are listed in increasing order, so increasing masks give
  // increasing sum_j alpha_j 2^(j-1), and masks 2i, 2i+1 differ in the first active one.
  for (std::size_t mask = 0; mask < count; ++mask) {
    std::vector<int> levels = alpha.levels();
    for (std::size_t b = 0; b < active.size(); ++b) {
      if ((mask & (std::size_t{1} << b)) == 0) --levels[active[b]];
    }
    out.corners.emplace_back(std::move(levels));
  }
  return out;
}

CornerSet single_corner(const MultiIndex& alpha) { return CornerSet{alpha, {alpha}}; }

int pair_sign(const CornerSet& stencil, std::size_t pair) {
  if (pair >= stencil.pair_count()) {
    throw std::out_of_range("pair index out of range");
  }
  const MultiIndex& upper = stencil.corners[2 * pair + 1];
  int distance = 0;
  for (std::size_t j = 0; j < upper.dim(); ++j) {
    distance += std::abs(stencil.base[j] - upper[j]);
  }
  return distance % 2 == 0 ? 1 : -1;
}

int pair_sign(const MultiIndex& alpha, std::size_t pair) {
  return pair_sign(corners(alpha), pair);
}

std::vector<int> CornerSet::coefficients() const {
  if (corners.size() == 1) return {1};
  std::vector<int> out(corners.size(), 0);
  for (std::size_t i = 0; i < pair_count(); ++i) {
    const int sign = pair_sign(*this, i);
    out[2 * i + 1] = sign;
    out[2 * i] = -sign;
  }
  return out;
}

std::map<MultiIndex, int> delta_weights(const MultiIndex& alpha) {
  const CornerSet stencil = corners(alpha);
  const std::vector<int> coeffs = stencil.coefficients();
  std::map<MultiIndex, int> out;
  for (std::size_t i = 0; i < stencil.size(); ++i) {
    out.emplace(stencil.corners[i], coeffs[i]);
  }
  return out;
}

}  // namespace mimcmc
