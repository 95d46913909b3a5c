#include "mimcmc/pcn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace mimcmc {

std::int64_t ChainConfig::effective_burn_in() const {
  if (burn_in) return *burn_in;
  return std::max<std::int64_t>(n_steps / 10, 1000);
}

void ChainConfig::validate() const {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
  if (n_steps < 1) throw std::invalid_argument("a chain needs at least one retained step");
  if (burn_in && *burn_in < 0) throw std::invalid_argument("burn-in must be non-negative");
  if (!(target_low > 0.0 && target_low < target_high && target_high < 1.0)) {
    throw std::invalid_argument("target acceptance band must satisfy 0 < low < high < 1");
  }
  if (tune_window < 1) throw std::invalid_argument("tuning window must be positive");
}

CoupledTarget::CoupledTarget(CoupledSolver solver, LikelihoodSpec likelihood)
    : solver_(std::move(solver)), likelihood_(std::move(likelihood)) {
  if (likelihood_.y.size() != solver_.observation_config().size()) {
    throw std::invalid_argument("observation vector length does not match the observation times");
  }
  if (!(likelihood_.tau2 > 0.0)) throw std::invalid_argument("likelihood needs a positive tau2");
}

CoupledTarget::State CoupledTarget::evaluate(DrivingNoise noise) const {
  State state;
  state.noise = std::move(noise);
  evaluate_into(state);
  return state;
}

void CoupledTarget::evaluate_into(State& state) const {
  solver_.evaluate(state.noise, state.observables);
  std::vector<double> log_g;
  log_g.reserve(corner_count());
  for (const auto& obs : state.observables.observations) log_g.push_back(log_likelihood(likelihood_, obs));
  state.weights = corner_weights(log_g);
}

void pcn_propose(const DrivingNoise& current, double rho, Rng& rng, DrivingNoise& out) {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("pcn_propose: rho must lie in (0, 1]");
  const double keep = std::sqrt(1.0 - rho);
  const double fresh = std::sqrt(rho);
  out.modes = current.modes;
  out.steps = current.steps;
  out.values.resize(current.values.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < current.values.size(); ++i) {
    out.values[i] = keep * current.values[i] + fresh * normal(rng);
  }
}

DrivingNoise pcn_propose(const DrivingNoise& current, double rho, Rng& rng) {
  DrivingNoise out;
  pcn_propose(current, rho, rng, out);
  return out;
}

bool mh_accept(double log_G_current, double log_G_proposed, double uniform) {
  if (!std::isfinite(log_G_current)) throw std::domain_error("mh_accept: non-finite current state");
  if (std::isnan(log_G_proposed)) throw std::domain_error("mh_accept: NaN proposal");
  if (!(uniform > 0.0 && uniform <= 1.0)) throw std::invalid_argument("mh_accept: uniform outside (0, 1]");
  const double log_ratio = log_G_proposed - log_G_current;
  if (log_ratio >= 0.0) return true;
  return std::log(uniform) < log_ratio;
}

TuneResult tune_rho(double initial_rho, const std::function<double(double)>& pilot, int max_windows,
                    double low, double high) {
  constexpr double kMinRho = 1e-8;
  TuneResult out;
  double rho = initial_rho;
  std::optional<double> lo;  // accepted too often here
  std::optional<double> hi;  // accepted too rarely here
  for (int w = 0; w < max_windows; ++w) {
    const double acceptance = pilot(rho);
    ++out.windows;
    if (acceptance >= low && acceptance <= high) {
      out.rho = rho;
      out.converged = true;
      out.bracketed = lo.has_value() && hi.has_value();
      return out;
    }
    if (acceptance > high) {
      if (rho >= 1.0) {
        out.rho = 1.0;
        out.converged = true;
        return out;
      }
      lo = rho;
      rho = hi ? std::sqrt(*lo * *hi) : std::min(1.0, 4.0 * rho);
    } else {
      hi = rho;
      if (rho <= kMinRho) break;
      rho = lo ? std::sqrt(*lo * *hi) : std::max(kMinRho, rho / 4.0);
    }
  }
  if (lo && hi) {
    out.rho = std::sqrt(*lo * *hi);
    out.bracketed = true;
    out.warning = "rho tuning did not converge; using the bracket midpoint";
  } else {
    out.rho = initial_rho;
    out.warning = "rho tuning could not bracket the target acceptance; keeping the default";
  }
  return out;
}

void ChainTrace::reserve(std::size_t steps) {
  phi_.reserve(steps * corners_);
  H_.reserve(steps * corners_);
  accepted_.reserve(steps);
}

void ChainTrace::push(const ChainRecord& record) {
  if (record.phi.size() != corners_ || record.H.size() != corners_) {
    throw std::invalid_argument("ChainTrace: record has the wrong corner count");
  }
  phi_.insert(phi_.end(), record.phi.begin(), record.phi.end());
  H_.insert(H_.end(), record.H.begin(), record.H.end());
  accepted_.push_back(record.accepted ? 1 : 0);
}

ChainStats run_chain(const CoupledTarget& target, const ChainConfig& config, const RecordSink& sink) {
  config.validate();
  Rng rng = make_rng(config.seed);
  const Resolution& finest = target.solver().finest();

  CoupledTarget::State current = target.evaluate(draw_noise(finest.modes, finest.steps, rng));
  CoupledTarget::State proposal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto step = [&](double rho) {
    pcn_propose(current.noise, rho, rng, proposal.noise);
    target.evaluate_into(proposal);
    const double u = 1.0 - unit(rng);
    const bool accepted = mh_accept(current.weights.log_G, proposal.weights.log_G, u);
    if (accepted) std::swap(current, proposal);
    return accepted;
  };

  ChainStats stats;
  stats.burn_in = config.effective_burn_in();
  double rho = config.rho;
  std::int64_t burned = 0;
  if (config.adapt && stats.burn_in >= config.tune_window) {
    auto pilot = [&](double trial) {
      std::int64_t accepted = 0;
      for (std::int64_t i = 0; i < config.tune_window; ++i) accepted += step(trial) ? 1 : 0;
      burned += config.tune_window;
      return static_cast<double>(accepted) / static_cast<double>(config.tune_window);
    };
    const int windows = static_cast<int>(stats.burn_in / config.tune_window);
    TuneResult tuned = tune_rho(config.rho, pilot, windows, config.target_low, config.target_high);
    rho = tuned.rho;
    stats.tuned = true;
    stats.tuning_converged = tuned.converged;
    stats.warning = std::move(tuned.warning);
  }
  for (; burned < stats.burn_in; ++burned) step(rho);

  stats.rho = rho;
  std::int64_t accepted_count = 0;
  for (std::int64_t j = 0; j < config.n_steps; ++j) {
    const bool accepted = step(rho);
    accepted_count += accepted ? 1 : 0;
    sink(ChainRecord{current.observables.qoi, current.weights.H, accepted, &current.noise});
  }
  stats.steps = config.n_steps;
  stats.acceptance_rate = static_cast<double>(accepted_count) / static_cast<double>(config.n_steps);
  return stats;
}

ChainRun run_chain(const CoupledTarget& target, const ChainConfig& config) {
  ChainRun run{ChainTrace(target.corner_count()), {}};
  run.trace.reserve(static_cast<std::size_t>(config.n_steps));
  run.stats = run_chain(target, config, [&](const ChainRecord& r) { run.trace.push(r); });
  return run;
}

}  // namespace mimcmc
