#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "mimcmc/experiments/commands.hpp"
#include "mimcmc/parallel.hpp"

namespace mimcmc::experiments {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double epsilon_of(int level) { return std::exp2(1 - level); }

MethodSummary summarize(const std::vector<CostErrorRow>& rows, const std::string& method,
                        const std::vector<int>& levels) {
  MethodSummary s;
  for (int level : levels) {
    double sq = 0.0;
    double cost = 0.0;
    int count = 0;
    for (const CostErrorRow& r : rows) {
      if (r.method != method || r.level != level) continue;
      sq += r.sq_error;
      cost += r.cost_units;
      ++count;
    }
    s.rmse.push_back(std::sqrt(sq / count));
    s.mean_cost.push_back(cost / count);
  }
  if (levels.size() >= 2) s.fit = fit_log_log(s.rmse, s.mean_cost);
  return s;
}

double cost_at(const SlopeFit& fit, double rmse) { return std::pow(10.0, fit.intercept + fit.slope * std::log10(rmse)); }

}  // namespace

std::int64_t mcmc_samples(double epsilon) {
  const double inv = 1.0 / epsilon;
  return static_cast<std::int64_t>(std::ceil(inv * inv * 2.0 * spde_time_level(epsilon)));
}

CostErrorResult run_cost_error(const ExperimentConfig& config, const Fixture& fixture) {
  config.validate();
  const MimcmcProblem problem = config.problem(fixture.data.y);
  CostErrorResult result;
  result.truth = oracle_posterior_mean(config, fixture.data.y);
  result.fixture_hash = fnv1a(fixture_to_json(fixture).dump());

  struct Task {
    int level;
    int replicate;
    bool multi;
  };
  std::vector<Task> tasks;
  std::vector<AllocationPlan> plans;
  for (int level : config.cost_error.levels) {
    const double eps = epsilon_of(level);
    AllocationPlan plan = allocate_spde(eps, config.bases);
    const std::int64_t largest = std::max(*std::max_element(plan.samples.begin(), plan.samples.end()), mcmc_samples(eps));
    if (largest > config.max_chain_length) {
      throw std::invalid_argument("chain length " + std::to_string(largest) + " exceeds max_chain_length");
    }
    plans.push_back(std::move(plan));
    for (int r = 0; r < config.cost_error.replicates; ++r) {
      tasks.push_back({level, r, true});
      tasks.push_back({level, r, false});
    }
  }

  result.rows.resize(tasks.size());
  parallel_for(tasks.size(), config.workers, [&](std::size_t i) {
    const Task& t = tasks[i];
    const auto plan_index = static_cast<std::size_t>(
        std::find(config.cost_error.levels.begin(), config.cost_error.levels.end(), t.level) -
        config.cost_error.levels.begin());
    const AllocationPlan& plan = plans[plan_index];
    CostErrorRow& row = result.rows[i];
    row.level = t.level;
    row.epsilon = plan.epsilon;
    row.replicate = t.replicate;
    row.seed = config.seed;
    const auto start = std::chrono::steady_clock::now();
    if (t.multi) {
      const MimcmcResult r = mimcmc_estimate(problem, plan, config.seed, static_cast<std::uint64_t>(t.replicate));
      row.method = "mimcmc";
      row.estimate = r.estimate;
      row.cost_units = r.cost;
    } else {
      const MultiIndex top{2 * t.level, t.level};
      const IndexRun r = single_level_mcmc(problem, top, mcmc_samples(plan.epsilon), config.seed,
                                           static_cast<std::uint64_t>(t.replicate));
      row.method = "mcmc";
      row.estimate = r.increment.value;
      row.cost_units = r.increment.cost;
    }
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.sq_error = (row.estimate - result.truth) * (row.estimate - result.truth);
  });

  result.mimcmc = summarize(result.rows, "mimcmc", config.cost_error.levels);
  result.mcmc = summarize(result.rows, "mcmc", config.cost_error.levels);
  if (config.cost_error.levels.size() >= 2) {
    result.common_error = std::max(*std::min_element(result.mimcmc.rmse.begin(), result.mimcmc.rmse.end()),
                                   *std::min_element(result.mcmc.rmse.begin(), result.mcmc.rmse.end()));
    result.mimcmc_cost_at_common = cost_at(result.mimcmc.fit, result.common_error);
    result.mcmc_cost_at_common = cost_at(result.mcmc.fit, result.common_error);
  }
  return result;
}

void write_cost_error_csv(const std::filesystem::path& path, const std::vector<CostErrorRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "method,eps_or_level,replicate,estimate,sq_error,cost_units,wall_s,seed\n";
  for (const CostErrorRow& r : rows) {
    out << r.method << ',' << num(r.epsilon) << ',' << r.replicate << ',' << num(r.estimate) << ','
        << num(r.sq_error) << ',' << num(r.cost_units) << ',' << num(r.wall_s) << ',' << r.seed << '\n';
  }
}

int cmd_cost_error(const ExperimentConfig& config, std::ostream& log) {
  const Fixture fixture = resolve_fixture(config);
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  if (config.fixture.empty()) write_json(dir / "fixture.json", fixture_to_json(fixture));

  const CostErrorResult result = run_cost_error(config, fixture);
  write_cost_error_csv(dir / "cost_error.csv", result.rows);

  auto method_json = [](const MethodSummary& s) {
    return nlohmann::json{{"slope", s.fit.slope}, {"slope_se", s.fit.slope_se}, {"intercept", s.fit.intercept},
                          {"rmse", s.rmse}, {"mean_cost", s.mean_cost}};
  };
  nlohmann::json summary{{"qoi", to_string(config.qoi)},
                         {"config_hash", hex64(fnv1a(to_json(config).dump()))},
                         {"fixture_hash", hex64(result.fixture_hash)},
                         {"truth", result.truth},
                         {"levels", config.cost_error.levels},
                         {"replicates", config.cost_error.replicates},
                         {"mimcmc", method_json(result.mimcmc)},
                         {"mcmc", method_json(result.mcmc)},
                         {"common_error", result.common_error},
                         {"mimcmc_cost_at_common_error", result.mimcmc_cost_at_common},
                         {"mcmc_cost_at_common_error", result.mcmc_cost_at_common}};
  update_summary(dir, "cost_error", summary, config);

  log << "mimcmc slope " << result.mimcmc.fit.slope << " +- " << result.mimcmc.fit.slope_se << ", mcmc slope "
      << result.mcmc.fit.slope << " +- " << result.mcmc.fit.slope_se << '\n';
  return 0;
}

}  // namespace mimcmc::experiments
