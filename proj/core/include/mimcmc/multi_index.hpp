#ifndef MIMCMC_MULTI_INDEX_HPP
#define MIMCMC_MULTI_INDEX_HPP

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mimcmc {

/// A vector of non-negative discretization levels, one entry per discretized dimension.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> levels);
  MultiIndex(std::initializer_list<int> levels);

  [[nodiscard]] std::size_t dim() const noexcept { return levels_.size(); }
  [[nodiscard]] int operator[](std::size_t i) const { return levels_.at(i); }
  [[nodiscard]] const std::vector<int>& levels() const noexcept { return levels_; }

  [[nodiscard]] bool is_origin() const noexcept;
  /// Number of strictly positive entries.
  [[nodiscard]] int active_count() const noexcept;
  /// Copy with entry `i` lowered by one. Throws if that entry is already zero.
  [[nodiscard]] MultiIndex decremented(std::size_t i) const;
  [[nodiscard]] int total() const noexcept;

  [[nodiscard]] std::string to_string() const;

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> levels_;
};

/// All multi-indices with 0 <= alpha_i <= max_levels[i], in lexicographic order.
std::vector<MultiIndex> enumerate_index_set(std::span<const int> max_levels);

/// The ordered stencil of a multi-index.
///
/// Corners are obtained by lowering any subset of the positive entries of `base`
/// by one. They are sorted by increasing sum_j alpha_j 2^(j-1), so that consecutive
/// entries (1,2), (3,4), ... differ by one level in the first active dimension and
/// the last corner is `base` itself. The origin has a single corner and no pairs.
struct CornerSet {
  MultiIndex base;
  std::vector<MultiIndex> corners;

  [[nodiscard]] std::size_t size() const noexcept { return corners.size(); }
  /// k'_alpha: number of (cheaper, dearer) corner pairs; zero for a single corner.
  [[nodiscard]] std::size_t pair_count() const noexcept {
    return corners.size() > 1 ? corners.size() / 2 : 0;
  }
  /// Signed coefficient of each corner in the mixed difference, aligned with `corners`.
  [[nodiscard]] std::vector<int> coefficients() const;
};

CornerSet corners(const MultiIndex& alpha);

/// A degenerate stencil holding only `alpha`; used for plain single-level chains.
CornerSet single_corner(const MultiIndex& alpha);

/// (-1)^{|alpha(k) - alpha(2i)|} for the zero-based pair index `pair`.
/// Throws std::out_of_range when `pair >= stencil.pair_count()`.
int pair_sign(const CornerSet& stencil, std::size_t pair);
int pair_sign(const MultiIndex& alpha, std::size_t pair);

/// Inclusion-exclusion coefficients c(beta) with Delta E_alpha = sum_beta c(beta) E_beta.
std::map<MultiIndex, int> delta_weights(const MultiIndex& alpha);

}  // namespace mimcmc

#endif
