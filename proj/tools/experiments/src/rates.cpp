#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "mimcmc/experiments/commands.hpp"
#include "mimcmc/parallel.hpp"
#include "mimcmc/rng.hpp"

namespace mimcmc::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  [[nodiscard]] double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : kNaN; }
};

// Signed sum over corners of phi_i H_i; with H = 1 this is the multi-increment itself.
double weighted_increment(const ChainRecord& r, const std::vector<int>& coeffs) {
  double d = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) d += coeffs[i] * r.phi[i] * r.H[i];
  return d;
}

std::optional<AxisFit> axis_fit(const std::vector<RatesRow>& rows, bool space) {
  std::vector<double> level;
  std::vector<double> log_var;
  for (const RatesRow& r : rows) {
    const int fixed = space ? r.prior.alpha[1] : r.prior.alpha[0];
    const int moving = space ? r.prior.alpha[0] : r.prior.alpha[1];
    if (fixed != 0 || moving == 0 || !(r.prior.variance > 0.0)) continue;
    level.push_back(moving);
    log_var.push_back(std::log2(r.prior.variance));
  }
  if (level.size() < 2) return std::nullopt;
  Eigen::MatrixXd design(static_cast<Eigen::Index>(level.size()), 2);
  Eigen::VectorXd response(static_cast<Eigen::Index>(level.size()));
  for (std::size_t i = 0; i < level.size(); ++i) {
    design(static_cast<Eigen::Index>(i), 0) = level[i];
    design(static_cast<Eigen::Index>(i), 1) = 1.0;
    response(static_cast<Eigen::Index>(i)) = log_var[i];
  }
  const LinearFit fit = least_squares(design, response);
  return AxisFit{-fit.coefficients(0), fit.std_errors(0)};
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RateRow sample_prior_increment(const ExperimentConfig& config, const MultiIndex& alpha, std::int64_t n) {
  const CornerSet stencil = corners(alpha);
  const ObservationConfig obs = config.observations();
  const CoupledTarget target(CoupledSolver(config.params, config.bases, stencil, obs, config.qoi),
                             LikelihoodSpec{std::vector<double>(obs.size(), 0.0),
                                            std::numeric_limits<double>::infinity()});
  ChainConfig chain;
  chain.rho = 1.0;
  chain.adapt = false;
  chain.burn_in = 0;
  chain.n_steps = n;
  chain.seed = derive_stream(config.seed, alpha, 0, StreamPurpose::prior_sampling);
  const std::vector<int> coeffs = stencil.coefficients();
  Welford acc;
  run_chain(target, chain, [&](const ChainRecord& r) { acc.add(weighted_increment(r, coeffs)); });
  return RateRow{alpha, n, acc.variance(), std::abs(acc.mean), cost_model(alpha, config.bases)};
}

RatesResult run_rates(const ExperimentConfig& config) {
  config.validate();
  const std::vector<int> top{config.rates.max_level_x, config.rates.max_level_t};
  const std::vector<MultiIndex> grid = enumerate_index_set(top);
  std::vector<double> y;
  if (config.rates.chain_samples > 0) y = resolve_fixture(config).data.y;

  RatesResult result;
  result.rows.resize(grid.size());
  parallel_for(grid.size(), config.workers, [&](std::size_t i) {
    const MultiIndex& alpha = grid[i];
    RatesRow& row = result.rows[i];
    row.prior = sample_prior_increment(config, alpha, config.rates.samples);
    row.var_chain = kNaN;
    if (config.rates.chain_samples > 0) {
      const CornerSet stencil = corners(alpha);
      const CoupledTarget target(
          CoupledSolver(config.params, config.bases, stencil, config.observations(), config.qoi),
          LikelihoodSpec{y, config.tau2});
      ChainConfig chain = config.chain;
      chain.n_steps = config.rates.chain_samples;
      chain.seed = derive_stream(config.seed, alpha, 0, StreamPurpose::chain);
      const std::vector<int> coeffs = stencil.coefficients();
      Welford acc;
      run_chain(target, chain, [&](const ChainRecord& r) { acc.add(weighted_increment(r, coeffs)); });
      row.var_chain = acc.variance();
    }
  });

  std::vector<std::pair<MultiIndex, double>> values;
  for (const RatesRow& r : result.rows) values.emplace_back(r.prior.alpha, r.prior.variance);
  result.fit = fit_rates(values);
  result.space_axis = axis_fit(result.rows, true);
  result.time_axis = axis_fit(result.rows, false);
  return result;
}

void write_rates_csv(const std::filesystem::path& path, const RatesResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "alpha_x,alpha_t,n_samples,var_prior,var_chain,cost_units\n";
  for (const RatesRow& r : result.rows) {
    out << r.prior.alpha[0] << ',' << r.prior.alpha[1] << ',' << r.prior.n << ',' << num(r.prior.variance) << ','
        << num(r.var_chain) << ',' << num(r.prior.cost) << '\n';
  }
}

int cmd_rates(const ExperimentConfig& config, std::ostream& log) {
  const RatesResult result = run_rates(config);
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  write_rates_csv(dir / "rates.csv", result);

  nlohmann::json summary;
  summary["qoi"] = to_string(config.qoi);
  summary["config_hash"] = hex64(fnv1a(to_json(config).dump()));
  summary["beta_x"] = result.fit.beta_x;
  summary["beta_x_se"] = result.fit.beta_x_se;
  summary["beta_t"] = result.fit.beta_t;
  summary["beta_t_se"] = result.fit.beta_t_se;
  summary["intercept"] = result.fit.intercept;
  if (result.space_axis) summary["axis_beta_x"] = {{"value", result.space_axis->slope}, {"se", result.space_axis->slope_se}};
  if (result.time_axis) summary["axis_beta_t"] = {{"value", result.time_axis->slope}, {"se", result.time_axis->slope_se}};
  if (config.rates.chain_samples > 0) summary["fixture_hash"] = hex64(fnv1a(fixture_to_json(resolve_fixture(config)).dump()));
  update_summary(dir, "rates", summary, config);

  log << "beta_x = " << result.fit.beta_x << " +- " << result.fit.beta_x_se << ", beta_t = " << result.fit.beta_t
      << " +- " << result.fit.beta_t_se << '\n';
  return 0;
}

}  // namespace mimcmc::experiments
