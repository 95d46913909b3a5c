#ifndef MIMCMC_EXPERIMENTS_COMMANDS_HPP
#define MIMCMC_EXPERIMENTS_COMMANDS_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mimcmc/experiments/config.hpp"

namespace mimcmc::experiments {

// ---- fixtures ------------------------------------------------------------

struct Fixture {
  SyntheticData data;
  ModelParams params;
  ObservationConfig observations;
};

nlohmann::json fixture_to_json(const Fixture& fixture);
Fixture fixture_from_json(const nlohmann::json& j);
Fixture read_fixture(const std::filesystem::path& path);
Fixture make_fixture(const ExperimentConfig& config);

/// The configured fixture if it exists, otherwise one generated from the experiment seed.
Fixture resolve_fixture(const ExperimentConfig& config);

/// Posterior mean of the QoI from the continuum joint law, conditioned on `y`.
double oracle_posterior_mean(const ExperimentConfig& config, const std::vector<double>& y);

// ---- rates ---------------------------------------------------------------

struct RatesRow {
  RateRow prior;
  double var_chain = 0.0;  ///< NaN unless a posterior chain was run
};

struct AxisFit {
  double slope = 0.0;
  double slope_se = 0.0;
};

struct RatesResult {
  std::vector<RatesRow> rows;
  RateFit fit;                      ///< over the full grid
  std::optional<AxisFit> space_axis;  ///< alpha_t = 0 row, alpha_x >= 1
  std::optional<AxisFit> time_axis;   ///< alpha_x = 0 column, alpha_t >= 1
};

/// Sample variance of the multi-increment under i.i.d. coupled-prior draws.
RateRow sample_prior_increment(const ExperimentConfig& config, const MultiIndex& alpha, std::int64_t n);

RatesResult run_rates(const ExperimentConfig& config);
void write_rates_csv(const std::filesystem::path& path, const RatesResult& result);
int cmd_rates(const ExperimentConfig& config, std::ostream& log);

// ---- cost vs error -------------------------------------------------------

struct CostErrorRow {
  std::string method;  ///< "mimcmc" or "mcmc"
  int level = 0;       ///< time level L of the precision level (2L, L)
  double epsilon = 0.0;
  int replicate = 0;
  double estimate = 0.0;
  double sq_error = 0.0;
  double cost_units = 0.0;
  double wall_s = 0.0;
  std::uint64_t seed = 0;
};

struct MethodSummary {
  std::vector<double> rmse;  ///< per level, in level order
  std::vector<double> mean_cost;
  SlopeFit fit;              ///< log10 cost ~ slope log10 rmse
};

struct CostErrorResult {
  std::vector<CostErrorRow> rows;
  double truth = 0.0;
  MethodSummary mimcmc;
  MethodSummary mcmc;
  double common_error = 0.0;  ///< max of the two smallest RMSEs
  double mimcmc_cost_at_common = 0.0;
  double mcmc_cost_at_common = 0.0;
  std::uint64_t fixture_hash = 0;
};

/// Chain length of the single-level baseline at precision eps: the coarsest
/// MIMCMC sample count, ceil(eps^-2 L_x).
std::int64_t mcmc_samples(double epsilon);

CostErrorResult run_cost_error(const ExperimentConfig& config, const Fixture& fixture);
void write_cost_error_csv(const std::filesystem::path& path, const std::vector<CostErrorRow>& rows);
int cmd_cost_error(const ExperimentConfig& config, std::ostream& log);

// ---- validation ----------------------------------------------------------

struct Check {
  std::string name;
  double tolerance = 0.0;
  double observed = 0.0;
  bool passed = false;
};

/// Seams for mutation testing of the validation gate.
struct ValidationHooks {
  std::function<int(const CornerSet&, std::size_t)> pair_sign =
      [](const CornerSet& s, std::size_t i) { return mimcmc::pair_sign(s, i); };
};

std::vector<Check> run_validation(const ExperimentConfig& config, const ValidationHooks& hooks = {});
void print_checks(std::ostream& out, const std::vector<Check>& checks);
int cmd_validate(const ExperimentConfig& config, std::ostream& log);

// ---- data ----------------------------------------------------------------

/// Writes the fixture to `path`; refuses an existing file unless `force`.
int cmd_generate_data(const ExperimentConfig& config, const std::filesystem::path& path, bool force,
                      std::ostream& log);

}  // namespace mimcmc::experiments

#endif
