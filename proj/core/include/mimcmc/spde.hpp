#ifndef MIMCMC_SPDE_HPP
#define MIMCMC_SPDE_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mimcmc/multi_index.hpp"
#include "mimcmc/rng.hpp"

/**
 * \file
 * \brief Spectral exponential-Euler solver for the stochastic heat equation
 *
 *   du = (u_xx + theta u) dt + sigma dW,  x in (0,1), Dirichlet boundary,
 *
 * in the sine basis e_k(x) = sqrt(2) sin(k pi x). A multi-index (alpha_x, alpha_t)
 * selects K = K0 2^alpha_x modes and M = M0 2^alpha_t time steps. Coupled solves
 * push one standardized noise array at the finest corner to every corner of the
 * mixed-difference stencil: fewer modes truncate it, fewer steps merge pairs of
 * scaled increments.
 */

namespace mimcmc {

struct ModelParams {
  double theta = 0.5;
  double sigma = 1.0;
  double final_time = 1.0;
  /// u_{k,0} for k = 1..size(); modes past the end start at `default_initial`.
  std::vector<double> initial_modes;
  double default_initial = 1.0;

  [[nodiscard]] double initial(long k) const {
    return k <= static_cast<long>(initial_modes.size()) ? initial_modes[static_cast<std::size_t>(k - 1)]
                                                        : default_initial;
  }
  /// Throws std::invalid_argument unless theta < pi^2, sigma >= 0 and T > 0.
  void validate() const;
};

/// Mode and step counts at the zero multi-index.
struct Bases {
  int modes = 2;
  int steps = 20;
};

struct Resolution {
  MultiIndex alpha;
  int modes = 0;
  int steps = 0;
  double step_size = 0.0;

  /// Resolution of a two-dimensional (alpha_x, alpha_t) multi-index.
  static Resolution of(const MultiIndex& alpha, const Bases& bases, double final_time);
};

/// Rational point p/q of the unit interval; lets basis values vanish exactly
/// where sin(k pi p/q) has a zero.
struct Site {
  long num;
  long den;
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};
inline constexpr Site kLeftSite{1, 3};
inline constexpr Site kRightSite{2, 3};
inline constexpr Site kMidSite{1, 2};

double sine_basis(long k, double x);
double sine_basis(long k, Site x);

struct StandardTag {};
struct ScaledTag {};

/// Mode-major array of per-mode, per-step values (mode k occupies row k-1).
template <class Tag>
struct ModeGrid {
  int modes = 0;
  int steps = 0;
  std::vector<double> values;

  ModeGrid() = default;
  ModeGrid(int modes_, int steps_)
      : modes(modes_), steps(steps_),
        values(static_cast<std::size_t>(modes_) * static_cast<std::size_t>(steps_), 0.0) {}

  double& operator()(int mode_row, int step) {
    return values[static_cast<std::size_t>(mode_row) * steps + step];
  }
  double operator()(int mode_row, int step) const {
    return values[static_cast<std::size_t>(mode_row) * steps + step];
  }
  [[nodiscard]] std::span<const double> row(int mode_row) const {
    return {values.data() + static_cast<std::size_t>(mode_row) * steps, static_cast<std::size_t>(steps)};
  }
};

/// Independent N(0,1) draws; the per-mode variance is applied by the solver.
using DrivingNoise = ModeGrid<StandardTag>;
/// Variance-scaled increments xi_{k,n} added in the update.
using NoiseIncrements = ModeGrid<ScaledTag>;

DrivingNoise draw_noise(int modes, int steps, Rng& rng);

/// Keeps the first `modes` rows. Throws if `modes` exceeds the available rows.
template <class Tag>
ModeGrid<Tag> coarsen_space(const ModeGrid<Tag>& grid, int modes) {
  if (modes > grid.modes || modes < 1) {
    throw std::invalid_argument("coarsen_space: target mode count out of range");
  }
  ModeGrid<Tag> out;
  out.modes = modes;
  out.steps = grid.steps;
  out.values.assign(grid.values.begin(),
                    grid.values.begin() + static_cast<std::ptrdiff_t>(modes) * grid.steps);
  return out;
}

/// Per-mode constants of one exponential-Euler step of size h.
struct StepCoefficients {
  double step_size = 0.0;
  std::vector<double> propagator;  ///< e^{-lambda h} + theta (1 - e^{-lambda h}) / lambda
  std::vector<double> decay;       ///< e^{-lambda h}
  std::vector<double> noise_std;   ///< sqrt of increment_variance

  static StepCoefficients make(const ModelParams& params, int modes, double step_size);
};

/// sigma^2 (1 - e^{-2 lambda_k h}) / (2 lambda_k), lambda_k = pi^2 k^2, evaluated with expm1.
double increment_variance(const ModelParams& params, long k, double step_size);

NoiseIncrements scale_noise(const DrivingNoise& noise, const StepCoefficients& coeffs);

/// Merges pairs of fine increments: e^{-lambda_k h} xi_{k,2n} + xi_{k,2n+1}, h being the
/// fine step. Throws on an odd step count.
NoiseIncrements coarsen_time(const NoiseIncrements& fine, std::span<const double> fine_decay);
NoiseIncrements coarsen_time(const NoiseIncrements& fine, const ModelParams& params,
                             double fine_step);

/// Modal states u_{k,n}, k = 1..modes, n = 0..steps.
struct ModalPath {
  int modes = 0;
  int steps = 0;
  double step_size = 0.0;
  std::vector<double> states;  ///< mode-major, steps + 1 entries per mode

  /// k is the one-based mode number.
  [[nodiscard]] double at(long k, int n) const {
    return states[static_cast<std::size_t>(k - 1) * (steps + 1) + n];
  }
  [[nodiscard]] std::vector<double> state(int n) const;
  [[nodiscard]] std::vector<double> final_state() const { return state(steps); }
};

ModalPath evolve(const ModelParams& params, const StepCoefficients& coeffs,
                 const NoiseIncrements& increments);
ModalPath exp_euler_solve(const ModelParams& params, const Resolution& resolution,
                          const DrivingNoise& noise);
ModalPath coarsen_space(const ModalPath& path, int modes);

struct ObservationConfig {
  std::vector<double> times;
  double tau2 = 0.1;

  /// t_j = j T / count for j = 1..count.
  static ObservationConfig uniform(int count, double final_time, double tau2);
  /// Length of G(u): the x = 1/3 block followed by the x = 2/3 block.
  [[nodiscard]] std::size_t size() const { return 2 * times.size(); }
  void validate(double final_time) const;
};

/// Step numbers of the observation times on a grid of `steps` steps of size `step_size`.
/// Throws std::invalid_argument for an off-grid time.
std::vector<int> observation_steps(const ObservationConfig& config, int steps, double step_size);

std::vector<double> observe(const ModalPath& path, const ObservationConfig& config);

enum class QoiKind {
  weighted,  ///< sum_k k^{-1} u_k(T) e_k(1/2)
  point,     ///< u(1/2, T) = sum_k u_k(T) e_k(1/2)
};

double qoi_weight(long k, QoiKind kind);
double qoi(std::span<const double> final_state, QoiKind kind = QoiKind::weighted);

/// One modal path per corner, in stencil order.
struct CoupledSolution {
  std::vector<ModalPath> corners;
};

CoupledSolution coupled_solve(const CornerSet& stencil, const ModelParams& params,
                              const Bases& bases, const DrivingNoise& noise);

/// What a likelihood and an estimator need from each corner.
struct CornerObservables {
  std::vector<std::vector<double>> observations;
  std::vector<double> qoi;
};

/// Precomputed coupled solver for one stencil. Thread-safe: `evaluate` only reads members.
class CoupledSolver {
 public:
  CoupledSolver(ModelParams params, Bases bases, CornerSet stencil, ObservationConfig observations,
                QoiKind kind = QoiKind::weighted);

  [[nodiscard]] const CornerSet& stencil() const noexcept { return stencil_; }
  [[nodiscard]] std::size_t corner_count() const noexcept { return stencil_.size(); }
  [[nodiscard]] const Resolution& finest() const noexcept { return resolutions_.back(); }
  [[nodiscard]] const Resolution& resolution(std::size_t corner) const { return resolutions_.at(corner); }
  [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
  [[nodiscard]] const ObservationConfig& observation_config() const noexcept { return observations_; }
  [[nodiscard]] QoiKind qoi_kind() const noexcept { return kind_; }

  /// Observation vector and quantity of interest of every corner. Never stores full paths.
  [[nodiscard]] CornerObservables evaluate(const DrivingNoise& noise) const;
  void evaluate(const DrivingNoise& noise, CornerObservables& out) const;

 private:
  struct CornerPlan {
    int modes;
    bool time_coarse;
    StepCoefficients coeffs;
    std::vector<int> obs_steps;
  };

  ModelParams params_;
  Bases bases_;
  CornerSet stencil_;
  ObservationConfig observations_;
  QoiKind kind_;
  std::vector<Resolution> resolutions_;
  std::vector<CornerPlan> plans_;
  StepCoefficients finest_coeffs_;
  std::vector<double> left_basis_;
  std::vector<double> right_basis_;
  std::vector<double> qoi_weights_;
  std::vector<double> initial_;
};

}  // namespace mimcmc

#endif
