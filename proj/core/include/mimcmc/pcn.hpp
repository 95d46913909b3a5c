#ifndef MIMCMC_PCN_HPP
#define MIMCMC_PCN_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mimcmc/bayes.hpp"
#include "mimcmc/rng.hpp"
#include "mimcmc/spde.hpp"

namespace mimcmc {

struct ChainConfig {
  double rho = 0.25;
  std::int64_t n_steps = 1000;
  /// Unset: 10% of n_steps with a floor of 1000.
  std::optional<std::int64_t> burn_in;
  /// Stream id of the chain; callers derive it with derive_stream.
  std::uint64_t seed = 0;
  bool adapt = true;
  double target_low = 0.4;
  double target_high = 0.6;
  std::int64_t tune_window = 100;

  [[nodiscard]] std::int64_t effective_burn_in() const;
  void validate() const;
};

/// Pi_alpha: the coupled prior (pushforward of N(0, I) through a CoupledSolver)
/// reweighted by the largest corner likelihood.
class CoupledTarget {
 public:
  CoupledTarget(CoupledSolver solver, LikelihoodSpec likelihood);

  struct State {
    DrivingNoise noise;
    CornerObservables observables;
    CornerWeights weights;
  };

  [[nodiscard]] State evaluate(DrivingNoise noise) const;
  void evaluate_into(State& state) const;

  [[nodiscard]] const CoupledSolver& solver() const noexcept { return solver_; }
  [[nodiscard]] const LikelihoodSpec& likelihood() const noexcept { return likelihood_; }
  [[nodiscard]] std::size_t corner_count() const noexcept { return solver_.corner_count(); }
  /// Work units of one chain step: K * M at the finest corner.
  [[nodiscard]] double step_cost() const noexcept {
    return static_cast<double>(solver_.finest().modes) * solver_.finest().steps;
  }

 private:
  CoupledSolver solver_;
  LikelihoodSpec likelihood_;
};

/// sqrt(1 - rho) x + sqrt(rho) eta with eta ~ N(0, I). Throws unless 0 < rho <= 1.
DrivingNoise pcn_propose(const DrivingNoise& current, double rho, Rng& rng);
void pcn_propose(const DrivingNoise& current, double rho, Rng& rng, DrivingNoise& out);

/// Metropolis-Hastings decision for a prior-reversible proposal: accept when
/// log(uniform) < log_G_proposed - log_G_current. `uniform` must lie in (0, 1].
/// Throws std::domain_error for a non-finite current value; a proposed -inf rejects.
bool mh_accept(double log_G_current, double log_G_proposed, double uniform);

struct TuneResult {
  double rho = 0.0;
  bool converged = false;
  bool bracketed = false;
  int windows = 0;
  std::string warning;
};

/// Bisection on log rho for a window acceptance rate inside [low, high].
///
/// `pilot(rho)` runs one window at `rho` and returns its acceptance rate. A rate above
/// `high` raises rho (by 4x until bracketed, capped at 1), a rate below `low` lowers it.
/// rho = 1 with a rate above `high` counts as converged. If the budget runs out with a
/// bracket the geometric midpoint is returned; without one, `initial_rho` is kept and a
/// warning is set.
TuneResult tune_rho(double initial_rho, const std::function<double(double)>& pilot, int max_windows,
                    double low = 0.4, double high = 0.6);

/// One retained step: corner values and weights of the current state.
struct ChainRecord {
  std::span<const double> phi;
  std::span<const double> H;
  bool accepted = false;
  /// Current driving noise; valid only during the sink call.
  const DrivingNoise* state = nullptr;
};

struct ChainStats {
  std::int64_t steps = 0;
  std::int64_t burn_in = 0;
  double acceptance_rate = 0.0;  ///< over retained steps
  double rho = 0.0;              ///< frozen step used for retained steps
  bool tuned = false;
  bool tuning_converged = false;
  std::string warning;
};

/// Row-per-step storage of a retained chain.
class ChainTrace {
 public:
  explicit ChainTrace(std::size_t corners = 1) : corners_(corners) {}

  void reserve(std::size_t steps);
  void push(const ChainRecord& record);

  [[nodiscard]] std::size_t corners() const noexcept { return corners_; }
  [[nodiscard]] std::size_t size() const noexcept { return accepted_.size(); }
  [[nodiscard]] std::span<const double> phi(std::size_t step) const {
    return {phi_.data() + step * corners_, corners_};
  }
  [[nodiscard]] std::span<const double> H(std::size_t step) const {
    return {H_.data() + step * corners_, corners_};
  }
  [[nodiscard]] bool accepted(std::size_t step) const { return accepted_[step] != 0; }

 private:
  std::size_t corners_;
  std::vector<double> phi_;
  std::vector<double> H_;
  std::vector<std::uint8_t> accepted_;
};

using RecordSink = std::function<void(const ChainRecord&)>;

/// pCN Metropolis-Hastings on the driving noise, targeting Pi_alpha. Starts from a fresh
/// N(0, I) draw, tunes rho during burn-in when enabled, then emits exactly n_steps
/// records. Output depends only on (target, config).
ChainStats run_chain(const CoupledTarget& target, const ChainConfig& config, const RecordSink& sink);

struct ChainRun {
  ChainTrace trace;
  ChainStats stats;
};

ChainRun run_chain(const CoupledTarget& target, const ChainConfig& config);

}  // namespace mimcmc

#endif
