#include "mimcmc/gaussian_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mimcmc/rng.hpp"

namespace mimcmc {

namespace {

double eigenvalue_of(long k) {
  const double kk = static_cast<double>(k);
  return std::numbers::pi * std::numbers::pi * kk * kk;
}

// Basis weight of every slot plus the time it is read at. Slot order matches observe().
struct SlotLayout {
  std::vector<double> times;
  std::vector<Site> sites;
  std::size_t observed = 0;
};

SlotLayout layout_of(const ObservationConfig& observations, double final_time) {
  SlotLayout out;
  const std::size_t m = observations.times.size();
  out.observed = 2 * m;
  for (int block = 0; block < 2; ++block) {
    for (double t : observations.times) {
      out.times.push_back(t);
      out.sites.push_back(block == 0 ? kLeftSite : kRightSite);
    }
  }
  out.times.push_back(final_time);
  return out;
}

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> y) {
  return {y.data(), static_cast<Eigen::Index>(y.size())};
}

void check_observed(const GaussianSpec& prior, std::span<const double> y, double tau2) {
  if (y.empty() || static_cast<Eigen::Index>(y.size()) > prior.dim()) {
    throw std::invalid_argument("conditioning: observation count must lie in [1, dim]");
  }
  if (!(tau2 > 0.0)) throw std::invalid_argument("conditioning: tau2 must be positive");
}

}  // namespace

void GaussianSpec::validate() const {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw std::domain_error("GaussianSpec: covariance shape does not match the mean");
  }
  const double scale = cov.norm();
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300)) {
    throw std::domain_error("GaussianSpec: covariance is not symmetric");
  }
  if (mean.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw std::domain_error("GaussianSpec: covariance is not positive semi-definite");
  }
}

ModeMoments mode_moments(const ModelParams& params, long k, double t) {
  const double rate = params.theta - eigenvalue_of(k);
  if (rate >= 0.0) throw std::domain_error("mode_moments: unstable mode (theta >= pi^2 k^2)");
  if (t < 0.0) throw std::invalid_argument("mode_moments: negative time");
  ModeMoments out;
  out.mean = std::exp(rate * t) * params.initial(k);
  out.variance = params.sigma * params.sigma * -std::expm1(2.0 * rate * t) / (-2.0 * rate);
  return out;
}

ModeMoments discrete_mode_moments(const ModelParams& params, long k, double step_size, int n) {
  if (n < 0) throw std::invalid_argument("discrete_mode_moments: negative step count");
  const double lambda = eigenvalue_of(k);
  const double decay = std::exp(-lambda * step_size);
  const double a = decay + params.theta * -std::expm1(-lambda * step_size) / lambda;
  const double v = params.sigma * params.sigma * -std::expm1(-2.0 * lambda * step_size) / (2.0 * lambda);
  ModeMoments out{params.initial(k), 0.0};
  for (int i = 0; i < n; ++i) {
    out.mean *= a;
    out.variance = a * a * out.variance + v;
  }
  return out;
}

LinearQoI LinearQoI::make(QoiKind kind, long max_modes) {
  if (max_modes < 1) throw std::invalid_argument("LinearQoI needs at least one mode");
  LinearQoI out;
  out.weights.reserve(static_cast<std::size_t>(max_modes));
  for (long k = 1; k <= max_modes; ++k) out.weights.push_back(qoi_weight(k, kind));
  return out;
}

GaussianSpec joint_gaussian(const ModelParams& params, long max_modes,
                            const ObservationConfig& observations, const LinearQoI& qoi) {
  if (max_modes < 1) throw std::invalid_argument("joint_gaussian: max_modes must be positive");
  if (static_cast<long>(qoi.weights.size()) < max_modes) {
    throw std::invalid_argument("joint_gaussian: QoI weights shorter than max_modes");
  }
  params.validate();
  observations.validate(params.final_time);
  const SlotLayout slots = layout_of(observations, params.final_time);
  const auto n = static_cast<Eigen::Index>(slots.times.size());

  GaussianSpec out{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
  Eigen::VectorXd coeff(n);
  std::vector<ModeMoments> moments(slots.times.size());
  for (long k = 1; k <= max_modes; ++k) {
    const double rate = params.theta - eigenvalue_of(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto s = static_cast<std::size_t>(i);
      coeff(i) = i + 1 < n ? sine_basis(k, slots.sites[s]) : qoi.weights[static_cast<std::size_t>(k - 1)];
      moments[s] = mode_moments(params, k, slots.times[s]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (coeff(i) == 0.0) continue;
      out.mean(i) += coeff(i) * moments[static_cast<std::size_t>(i)].mean;
      for (Eigen::Index j = 0; j <= i; ++j) {
        if (coeff(j) == 0.0) continue;
        const double ti = slots.times[static_cast<std::size_t>(i)];
        const double tj = slots.times[static_cast<std::size_t>(j)];
        // Cov(u(s), u(t)) = e^{(theta - lambda)(t - s)} Var(u(s)) for s <= t.
        const double var = ti <= tj ? moments[static_cast<std::size_t>(i)].variance
                                    : moments[static_cast<std::size_t>(j)].variance;
        out.cov(i, j) += coeff(i) * coeff(j) * std::exp(rate * std::abs(ti - tj)) * var;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) out.cov(j, i) = out.cov(i, j);
  }
  return out;
}

GaussianSpec condition_on_data_covariance_form(const GaussianSpec& prior, std::span<const double> y,
                                               double tau2) {
  if (std::isinf(tau2)) return prior;
  check_observed(prior, y, tau2);
  const auto r = static_cast<Eigen::Index>(y.size());
  const Eigen::MatrixXd cross = prior.cov.leftCols(r);  // Sigma H^T
  Eigen::MatrixXd s = prior.cov.topLeftCorner(r, r);
  s.diagonal().array() += tau2;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) throw std::domain_error("conditioning: innovation matrix not positive definite");
  GaussianSpec out;
  out.mean = prior.mean + cross * llt.solve(as_vector(y) - prior.mean.head(r));
  out.cov = prior.cov - cross * llt.solve(cross.transpose());
  symmetrize(out.cov);
  return out;
}

GaussianSpec condition_on_data(const GaussianSpec& prior, std::span<const double> y, double tau2) {
  if (std::isinf(tau2)) return prior;
  check_observed(prior, y, tau2);
  const Eigen::Index n = prior.dim();
  const auto r = static_cast<Eigen::Index>(y.size());

  Eigen::LLT<Eigen::MatrixXd> llt(prior.cov);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-12 * prior.cov.trace() / static_cast<double>(n);
    Eigen::MatrixXd shifted = prior.cov;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() != Eigen::Success) return condition_on_data_covariance_form(prior, y, tau2);
  }
  Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(n, n));
  symmetrize(precision);
  Eigen::VectorXd rhs = precision * prior.mean;
  precision.topLeftCorner(r, r).diagonal().array() += 1.0 / tau2;
  rhs.head(r) += as_vector(y) / tau2;

  Eigen::LLT<Eigen::MatrixXd> post(precision);
  if (post.info() != Eigen::Success) return condition_on_data_covariance_form(prior, y, tau2);
  GaussianSpec out;
  out.cov = post.solve(Eigen::MatrixXd::Identity(n, n));
  symmetrize(out.cov);
  out.mean = out.cov * rhs;
  return out;
}

ModeMoments qoi_moments(const GaussianSpec& spec) {
  const Eigen::Index last = spec.dim() - 1;
  if (last < 0) throw std::invalid_argument("qoi_moments: empty spec");
  return {spec.mean(last), spec.cov(last, last)};
}

SyntheticData generate_data(const ModelParams& params, long max_modes,
                            const ObservationConfig& observations, std::uint64_t seed) {
  params.validate();
  observations.validate(params.final_time);
  if (max_modes < 1) throw std::invalid_argument("generate_data: max_modes must be positive");
  if (!std::isfinite(observations.tau2) || observations.tau2 < 0.0) {
    throw std::invalid_argument("generate_data: tau2 must be finite and non-negative");
  }
  Rng rng = make_rng(combine(seed, static_cast<std::uint64_t>(StreamPurpose::synthetic_data)));
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t m = observations.times.size();

  SyntheticData out;
  out.seed = seed;
  out.max_modes = max_modes;
  out.truth.resize(static_cast<std::size_t>(max_modes));
  out.noiseless.assign(2 * m, 0.0);
  ModelParams start = params;
  for (long k = 1; k <= max_modes; ++k) {
    const double left = sine_basis(k, kLeftSite);
    const double right = sine_basis(k, kRightSite);
    double u = params.initial(k);
    double t = 0.0;
    auto advance = [&](double to) {
      start.initial_modes.clear();
      start.default_initial = u;
      const ModeMoments step = mode_moments(start, k, to - t);
      u = step.mean + std::sqrt(step.variance) * normal(rng);
      t = to;
    };
    for (std::size_t j = 0; j < m; ++j) {
      advance(observations.times[j]);
      out.noiseless[j] += left * u;
      out.noiseless[m + j] += right * u;
    }
    if (t < params.final_time) advance(params.final_time);
    out.truth[static_cast<std::size_t>(k - 1)] = u;
  }
  const double tau = std::sqrt(observations.tau2);
  out.y = out.noiseless;
  for (double& v : out.y) v += tau * normal(rng);
  return out;
}

GaussianSpec discrete_joint(const MultiIndex& alpha, const ModelParams& params, const Bases& bases,
                            const ObservationConfig& observations, QoiKind kind) {
  params.validate();
  observations.validate(params.final_time);
  const Resolution res = Resolution::of(alpha, bases, params.final_time);
  const std::vector<int> obs_steps = observation_steps(observations, res.steps, res.step_size);
  const std::size_t m = obs_steps.size();
  const auto n = static_cast<Eigen::Index>(2 * m + 1);
  std::vector<int> slot_step(2 * m + 1);
  for (std::size_t j = 0; j < m; ++j) slot_step[j] = slot_step[m + j] = obs_steps[j];
  slot_step[2 * m] = res.steps;

  GaussianSpec out{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
  Eigen::VectorXd coeff(n);
  std::vector<double> mean(static_cast<std::size_t>(res.steps) + 1);
  std::vector<double> var(static_cast<std::size_t>(res.steps) + 1);
  for (long k = 1; k <= res.modes; ++k) {
    const double lambda = eigenvalue_of(k);
    const double a = std::exp(-lambda * res.step_size) +
                     params.theta * -std::expm1(-lambda * res.step_size) / lambda;
    const double v =
        params.sigma * params.sigma * -std::expm1(-2.0 * lambda * res.step_size) / (2.0 * lambda);
    mean[0] = params.initial(k);
    var[0] = 0.0;
    for (std::size_t s = 1; s < mean.size(); ++s) {
      mean[s] = a * mean[s - 1];
      var[s] = a * a * var[s - 1] + v;
    }
    for (std::size_t j = 0; j < m; ++j) {
      coeff(static_cast<Eigen::Index>(j)) = sine_basis(k, kLeftSite);
      coeff(static_cast<Eigen::Index>(m + j)) = sine_basis(k, kRightSite);
    }
    coeff(n - 1) = qoi_weight(k, kind);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (coeff(i) == 0.0) continue;
      const auto si = static_cast<std::size_t>(slot_step[static_cast<std::size_t>(i)]);
      out.mean(i) += coeff(i) * mean[si];
      for (Eigen::Index j = 0; j <= i; ++j) {
        if (coeff(j) == 0.0) continue;
        const auto sj = static_cast<std::size_t>(slot_step[static_cast<std::size_t>(j)]);
        const std::size_t lo = std::min(si, sj);
        const std::size_t gap = std::max(si, sj) - lo;
        out.cov(i, j) += coeff(i) * coeff(j) * std::pow(a, static_cast<double>(gap)) * var[lo];
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) out.cov(j, i) = out.cov(i, j);
  }
  return out;
}

ModeMoments discrete_posterior(const MultiIndex& alpha, const ModelParams& params, const Bases& bases,
                               const ObservationConfig& observations, std::span<const double> y,
                               QoiKind kind) {
  const GaussianSpec joint = discrete_joint(alpha, params, bases, observations, kind);
  if (static_cast<Eigen::Index>(y.size()) != joint.dim() - 1) {
    throw std::invalid_argument("discrete_posterior: observation vector has the wrong length");
  }
  // The level-alpha joint is singular whenever 2m exceeds the mode count.
  return qoi_moments(condition_on_data_covariance_form(joint, y, observations.tau2));
}

}  // namespace mimcmc
