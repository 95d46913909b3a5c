#include "mimcmc/spde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mimcmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

double eigenvalue(long k) { return kPi * kPi * static_cast<double>(k) * static_cast<double>(k); }

}  // namespace

void ModelParams::validate() const {
  if (!(theta < kPi * kPi)) throw std::invalid_argument("theta must be below pi^2");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  if (!(final_time > 0.0)) throw std::invalid_argument("final time must be positive");
}

Resolution Resolution::of(const MultiIndex& alpha, const Bases& bases, double final_time) {
  if (alpha.dim() != 2) {
    throw std::invalid_argument("SPDE resolutions take a two-dimensional multi-index");
  }
  if (bases.modes < 1 || bases.steps < 1) throw std::invalid_argument("base resolutions must be positive");
  if (alpha[0] > 24 || alpha[1] > 24) throw std::invalid_argument("level too deep for this solver");
  Resolution out;
  out.alpha = alpha;
  out.modes = bases.modes << alpha[0];
  out.steps = bases.steps << alpha[1];
  out.step_size = final_time / out.steps;
  return out;
}

double sine_basis(long k, double x) { return kSqrt2 * std::sin(static_cast<double>(k) * kPi * x); }

double sine_basis(long k, Site x) {
  const long long period = 2LL * x.den;
  long long r = (static_cast<long long>(k) * x.num) % period;
  if (r < 0) r += period;
  if (r == 0 || r == x.den) return 0.0;
  if (2 * r == x.den) return kSqrt2;
  if (2 * r == 3LL * x.den) return -kSqrt2;
  return kSqrt2 * std::sin(kPi * static_cast<double>(r) / static_cast<double>(x.den));
}

DrivingNoise draw_noise(int modes, int steps, Rng& rng) {
  DrivingNoise out(modes, steps);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out.values) v = normal(rng);
  return out;
}

double increment_variance(const ModelParams& params, long k, double step_size) {
  const double lambda = eigenvalue(k);
  return params.sigma * params.sigma * -std::expm1(-2.0 * lambda * step_size) / (2.0 * lambda);
}

StepCoefficients StepCoefficients::make(const ModelParams& params, int modes, double step_size) {
  StepCoefficients out;
  out.step_size = step_size;
  out.propagator.resize(static_cast<std::size_t>(modes));
  out.decay.resize(static_cast<std::size_t>(modes));
  out.noise_std.resize(static_cast<std::size_t>(modes));
  for (int row = 0; row < modes; ++row) {
    const long k = row + 1;
    const double lambda = eigenvalue(k);
    const double decay = std::exp(-lambda * step_size);
    out.decay[row] = decay;
    out.propagator[row] = decay + params.theta * -std::expm1(-lambda * step_size) / lambda;
    out.noise_std[row] = std::sqrt(increment_variance(params, k, step_size));
  }
  return out;
}

NoiseIncrements scale_noise(const DrivingNoise& noise, const StepCoefficients& coeffs) {
  if (static_cast<std::size_t>(noise.modes) > coeffs.noise_std.size()) {
    throw std::invalid_argument("scale_noise: more noise rows than coefficients");
  }
  NoiseIncrements out(noise.modes, noise.steps);
  for (int row = 0; row < noise.modes; ++row) {
    const double s = coeffs.noise_std[row];
    const auto src = noise.row(row);
    double* dst = out.values.data() + static_cast<std::size_t>(row) * noise.steps;
    for (int n = 0; n < noise.steps; ++n) dst[n] = s * src[n];
  }
  return out;
}

NoiseIncrements coarsen_time(const NoiseIncrements& fine, std::span<const double> fine_decay) {
  if (fine.steps % 2 != 0) throw std::invalid_argument("coarsen_time: odd step count");
  if (fine_decay.size() < static_cast<std::size_t>(fine.modes)) {
    throw std::invalid_argument("coarsen_time: missing decay factors");
  }
  const int coarse_steps = fine.steps / 2;
  NoiseIncrements out(fine.modes, coarse_steps);
  for (int row = 0; row < fine.modes; ++row) {
    const auto src = fine.row(row);
    const double d = fine_decay[row];
    double* dst = out.values.data() + static_cast<std::size_t>(row) * coarse_steps;
    for (int n = 0; n < coarse_steps; ++n) dst[n] = d * src[2 * n] + src[2 * n + 1];
  }
  return out;
}

NoiseIncrements coarsen_time(const NoiseIncrements& fine, const ModelParams& params,
                             double fine_step) {
  const auto coeffs = StepCoefficients::make(params, fine.modes, fine_step);
  return coarsen_time(fine, coeffs.decay);
}

std::vector<double> ModalPath::state(int n) const {
  if (n < 0 || n > steps) throw std::out_of_range("ModalPath::state: step out of range");
  std::vector<double> out(static_cast<std::size_t>(modes));
  for (int row = 0; row < modes; ++row) out[row] = states[static_cast<std::size_t>(row) * (steps + 1) + n];
  return out;
}

ModalPath evolve(const ModelParams& params, const StepCoefficients& coeffs,
                 const NoiseIncrements& increments) {
  if (static_cast<std::size_t>(increments.modes) > coeffs.propagator.size()) {
    throw std::invalid_argument("evolve: more increment rows than coefficients");
  }
  ModalPath path;
  path.modes = increments.modes;
  path.steps = increments.steps;
  path.step_size = coeffs.step_size;
  path.states.resize(static_cast<std::size_t>(path.modes) * (path.steps + 1));
  for (int row = 0; row < path.modes; ++row) {
    double* out = path.states.data() + static_cast<std::size_t>(row) * (path.steps + 1);
    const auto inc = increments.row(row);
    const double a = coeffs.propagator[row];
    double u = params.initial(row + 1);
    out[0] = u;
    for (int n = 0; n < path.steps; ++n) {
      u = a * u + inc[n];
      out[n + 1] = u;
    }
  }
  return path;
}

ModalPath exp_euler_solve(const ModelParams& params, const Resolution& resolution,
                          const DrivingNoise& noise) {
  if (noise.modes != resolution.modes || noise.steps != resolution.steps) {
    throw std::invalid_argument("exp_euler_solve: noise shape does not match the resolution");
  }
  const auto coeffs = StepCoefficients::make(params, resolution.modes, resolution.step_size);
  return evolve(params, coeffs, scale_noise(noise, coeffs));
}

ModalPath coarsen_space(const ModalPath& path, int modes) {
  if (modes > path.modes || modes < 1) {
    throw std::invalid_argument("coarsen_space: target mode count out of range");
  }
  ModalPath out = path;
  out.modes = modes;
  out.states.resize(static_cast<std::size_t>(modes) * (path.steps + 1));
  return out;
}

ObservationConfig ObservationConfig::uniform(int count, double final_time, double tau2) {
  if (count < 1) throw std::invalid_argument("need at least one observation time");
  ObservationConfig out;
  out.tau2 = tau2;
  out.times.reserve(static_cast<std::size_t>(count));
  for (int j = 1; j <= count; ++j) out.times.push_back(j * final_time / count);
  return out;
}

void ObservationConfig::validate(double final_time) const {
  if (times.empty()) throw std::invalid_argument("no observation times");
  if (!(tau2 >= 0.0)) throw std::invalid_argument("observation noise variance must be non-negative");
  double previous = 0.0;
  for (double t : times) {
    if (!(t > previous) || t > final_time * (1.0 + 1e-12)) {
      throw std::invalid_argument("observation times must increase within (0, T]");
    }
    previous = t;
  }
}

std::vector<int> observation_steps(const ObservationConfig& config, int steps, double step_size) {
  std::vector<int> out;
  out.reserve(config.times.size());
  for (double t : config.times) {
    const double exact = t / step_size;
    const double rounded = std::round(exact);
    if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact) || rounded < 1.0 ||
        rounded > static_cast<double>(steps)) {
      throw std::invalid_argument("observation time " + std::to_string(t) +
                                  " is not on the time grid");
    }
    out.push_back(static_cast<int>(rounded));
  }
  return out;
}

std::vector<double> observe(const ModalPath& path, const ObservationConfig& config) {
  const auto steps = observation_steps(config, path.steps, path.step_size);
  const std::size_t m = steps.size();
  std::vector<double> out(2 * m, 0.0);
  for (long k = 1; k <= path.modes; ++k) {
    const double left = sine_basis(k, kLeftSite);
    const double right = sine_basis(k, kRightSite);
    for (std::size_t j = 0; j < m; ++j) {
      const double u = path.at(k, steps[j]);
      out[j] += u * left;
      out[m + j] += u * right;
    }
  }
  return out;
}

double qoi_weight(long k, QoiKind kind) {
  const double basis = sine_basis(k, kMidSite);
  return kind == QoiKind::weighted ? basis / static_cast<double>(k) : basis;
}

double qoi(std::span<const double> final_state, QoiKind kind) {
  double sum = 0.0;
  for (std::size_t row = 0; row < final_state.size(); ++row) {
    sum += qoi_weight(static_cast<long>(row) + 1, kind) * final_state[row];
  }
  return sum;
}

CoupledSolution coupled_solve(const CornerSet& stencil, const ModelParams& params,
                              const Bases& bases, const DrivingNoise& noise) {
  const Resolution finest = Resolution::of(stencil.base, bases, params.final_time);
  if (noise.modes != finest.modes || noise.steps != finest.steps) {
    throw std::invalid_argument("coupled_solve: noise must be shaped for the finest corner");
  }
  const auto fine_coeffs = StepCoefficients::make(params, finest.modes, finest.step_size);
  const NoiseIncrements fine = scale_noise(noise, fine_coeffs);
  NoiseIncrements coarse;
  CoupledSolution out;
  for (const MultiIndex& corner : stencil.corners) {
    const Resolution res = Resolution::of(corner, bases, params.final_time);
    const bool time_coarse = res.steps < finest.steps;
    if (time_coarse && coarse.values.empty()) coarse = coarsen_time(fine, fine_coeffs.decay);
    const NoiseIncrements& src = time_coarse ? coarse : fine;
    const auto coeffs = StepCoefficients::make(params, res.modes, res.step_size);
    out.corners.push_back(evolve(params, coeffs, coarsen_space(src, res.modes)));
  }
  return out;
}

CoupledSolver::CoupledSolver(ModelParams params, Bases bases, CornerSet stencil,
                             ObservationConfig observations, QoiKind kind)
    : params_(std::move(params)),
      bases_(bases),
      stencil_(std::move(stencil)),
      observations_(std::move(observations)),
      kind_(kind) {
  params_.validate();
  observations_.validate(params_.final_time);
  if (stencil_.corners.empty() || stencil_.corners.back() != stencil_.base) {
    throw std::invalid_argument("stencil must end at its base multi-index");
  }
  const Resolution finest = Resolution::of(stencil_.base, bases_, params_.final_time);
  finest_coeffs_ = StepCoefficients::make(params_, finest.modes, finest.step_size);
  for (const MultiIndex& corner : stencil_.corners) {
    Resolution res = Resolution::of(corner, bases_, params_.final_time);
    const bool time_coarse = res.steps < finest.steps;
    if (time_coarse && 2 * res.steps != finest.steps) {
      throw std::invalid_argument("corners may coarsen time by one level only");
    }
    plans_.push_back(CornerPlan{res.modes, time_coarse,
                                StepCoefficients::make(params_, res.modes, res.step_size),
                                observation_steps(observations_, res.steps, res.step_size)});
    resolutions_.push_back(std::move(res));
  }
  for (long k = 1; k <= finest.modes; ++k) {
    left_basis_.push_back(sine_basis(k, kLeftSite));
    right_basis_.push_back(sine_basis(k, kRightSite));
    qoi_weights_.push_back(qoi_weight(k, kind_));
    initial_.push_back(params_.initial(k));
  }
}

CornerObservables CoupledSolver::evaluate(const DrivingNoise& noise) const {
  CornerObservables out;
  evaluate(noise, out);
  return out;
}

void CoupledSolver::evaluate(const DrivingNoise& noise, CornerObservables& out) const {
  const Resolution& top = finest();
  if (noise.modes != top.modes || noise.steps != top.steps) {
    throw std::invalid_argument("CoupledSolver: noise must be shaped for the finest corner");
  }
  const NoiseIncrements fine = scale_noise(noise, finest_coeffs_);
  NoiseIncrements coarse;
  const std::size_t m = observations_.times.size();
  out.observations.resize(plans_.size());
  out.qoi.assign(plans_.size(), 0.0);
  for (std::size_t c = 0; c < plans_.size(); ++c) {
    const CornerPlan& plan = plans_[c];
    if (plan.time_coarse && coarse.values.empty()) coarse = coarsen_time(fine, finest_coeffs_.decay);
    const NoiseIncrements& src = plan.time_coarse ? coarse : fine;
    auto& obs = out.observations[c];
    obs.assign(2 * m, 0.0);
    double q = 0.0;
    for (int row = 0; row < plan.modes; ++row) {
      const double a = plan.coeffs.propagator[row];
      const double* inc = src.values.data() + static_cast<std::size_t>(row) * src.steps;
      double u = initial_[row];
      std::size_t j = 0;
      for (int n = 0; n < src.steps; ++n) {
        u = a * u + inc[n];
        if (j < m && n + 1 == plan.obs_steps[j]) {
          obs[j] += u * left_basis_[row];
          obs[m + j] += u * right_basis_[row];
          ++j;
        }
      }
      q += qoi_weights_[row] * u;
    }
    out.qoi[c] = q;
  }
}

}  // namespace mimcmc
