#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mimcmc/experiments/commands.hpp"

namespace {

using namespace mimcmc;
using namespace mimcmc::experiments;
namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("mimcmc_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Drops the wall_s column, the only non-deterministic one.
std::string without_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    cells.erase(cells.begin() + 6);
    for (const auto& c : cells) out += c + ",";
    out += "\n";
  }
  return out;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.rates.max_level_x = 2;
  c.rates.max_level_t = 1;
  c.rates.samples = 300;
  c.cost_error.levels = {1};
  c.cost_error.replicates = 2;
  c.max_modes = 1024;
  return c;
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  c.params.theta = 0.25;
  c.seed = 99;
  c.cost_error.levels = {1, 3};
  c.qoi = QoiKind::point;
  const nlohmann::json j = to_json(c);
  EXPECT_EQ(to_json(config_from_json(j)), j);
}

TEST(Config, RejectsUnknownKeys) {
  nlohmann::json j = to_json(ExperimentConfig{});
  j["thetta"] = 0.5;
  EXPECT_THROW(config_from_json(j), std::invalid_argument);
}

TEST(Config, InfiniteNoiseAccepted) {
  const ExperimentConfig c = config_from_json(nlohmann::json{{"tau2", "inf"}});
  EXPECT_TRUE(std::isinf(c.tau2));
}

TEST(Config, ObservationCountMustDivideSteps) {
  ExperimentConfig c;
  c.observation_count = 7;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Config, PaperScaleRaisesCeilings) {
  ExperimentConfig c;
  c.apply_paper_scale();
  EXPECT_EQ(c.max_level_x, 14);
  EXPECT_EQ(c.max_level_t, 7);
  EXPECT_EQ(c.cost_error.replicates, 30);
  EXPECT_NO_THROW(c.validate());
}

TEST(Fixture, RefusesOverwriteWithoutForce) {
  TempDir dir;
  const fs::path file = dir.path() / "fixture.json";
  ExperimentConfig c = small_config();
  std::ostringstream log;
  ASSERT_EQ(cmd_generate_data(c, file, false, log), 0);
  const std::string first = slurp(file);
  c.seed += 1;
  EXPECT_NE(cmd_generate_data(c, file, false, log), 0);
  EXPECT_EQ(slurp(file), first);
  EXPECT_EQ(cmd_generate_data(c, file, true, log), 0);
  EXPECT_NE(slurp(file), first);
}

TEST(Fixture, RoundTrip) {
  TempDir dir;
  const fs::path file = dir.path() / "fixture.json";
  const ExperimentConfig c = small_config();
  std::ostringstream log;
  ASSERT_EQ(cmd_generate_data(c, file, false, log), 0);
  const Fixture back = read_fixture(file);
  const Fixture made = make_fixture(c);
  EXPECT_EQ(back.data.y, made.data.y);
  EXPECT_EQ(back.data.truth, made.data.truth);
  EXPECT_EQ(back.data.seed, c.seed);
  EXPECT_EQ(fixture_to_json(back), fixture_to_json(made));
}

TEST(Rates, SingleIndexGridIsDegenerate) {
  ExperimentConfig c = small_config();
  c.rates.max_level_x = 0;
  c.rates.max_level_t = 0;
  try {
    run_rates(c);
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "degenerate design matrix");
  }
}

TEST(Rates, PlantedSlopesPassThrough) {
  std::vector<std::pair<MultiIndex, double>> values;
  for (int x = 0; x <= 5; ++x) {
    for (int t = 0; t <= 5; ++t) values.emplace_back(MultiIndex{x, t}, 3.0 * std::exp2(-1.0 * x - 2.0 * t));
  }
  const RateFit fit = fit_rates(values);
  EXPECT_NEAR(fit.beta_x, 1.0, 1e-12);
  EXPECT_NEAR(fit.beta_t, 2.0, 1e-12);
}

TEST(Rates, CsvBytesIndependentOfWorkers) {
  TempDir dir;
  ExperimentConfig c = small_config();
  write_rates_csv(dir.path() / "a.csv", run_rates(c));
  c.workers = 3;
  write_rates_csv(dir.path() / "b.csv", run_rates(c));
  const std::string a = slurp(dir.path() / "a.csv");
  EXPECT_EQ(a, slurp(dir.path() / "b.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')), "alpha_x,alpha_t,n_samples,var_prior,var_chain,cost_units");
}

TEST(Rates, PriorVarianceShrinksAlongSpace) {
  ExperimentConfig c = small_config();
  const RateRow coarse = sample_prior_increment(c, {1, 0}, 2000);
  const RateRow fine = sample_prior_increment(c, {3, 0}, 2000);
  EXPECT_GT(coarse.variance, fine.variance);
  EXPECT_EQ(fine.cost, cost_model({3, 0}, c.bases));
}

TEST(CostError, ReplicatesAreReproducible) {
  TempDir dir;
  ExperimentConfig c = small_config();
  const Fixture f = make_fixture(c);
  write_cost_error_csv(dir.path() / "a.csv", run_cost_error(c, f).rows);
  c.workers = 2;
  write_cost_error_csv(dir.path() / "b.csv", run_cost_error(c, f).rows);
  EXPECT_EQ(without_wall_time(slurp(dir.path() / "a.csv")), without_wall_time(slurp(dir.path() / "b.csv")));
}

TEST(CostError, ZeroNoiseErrorIsPureBias) {
  ExperimentConfig c = small_config();
  c.params.sigma = 0.0;
  c.cost_error.levels = {1, 2, 3};
  c.cost_error.replicates = 2;
  const CostErrorResult r = run_cost_error(c, make_fixture(c));
  for (const CostErrorRow& row : r.rows) {
    // Every replicate and both methods land on the deterministic level-(2L, L) value.
    const Resolution top = Resolution::of({2 * row.level, row.level}, c.bases, c.params.final_time);
    const double phi =
        qoi(exp_euler_solve(c.params, top, DrivingNoise(top.modes, top.steps)).final_state(), c.qoi);
    EXPECT_NEAR(row.estimate, phi, 1e-12) << row.method << " level " << row.level;
  }
  for (std::size_t i = 1; i < r.mimcmc.rmse.size(); ++i) {
    EXPECT_LT(r.mimcmc.rmse[i], r.mimcmc.rmse[i - 1]);
    EXPECT_LT(r.mcmc.rmse[i], r.mcmc.rmse[i - 1]);
  }
}

TEST(CostError, BaselineLengthMatchesCoarsestIndex) {
  for (int level : {1, 2, 3, 4}) {
    const double eps = std::exp2(1.0 - level);
    const AllocationPlan plan = allocate_spde(eps);
    EXPECT_EQ(mcmc_samples(eps), plan.samples_for({0, 0}));
  }
}

TEST(Validate, DefaultConfigPasses) {
  for (const Check& check : run_validation(ExperimentConfig{})) {
    EXPECT_TRUE(check.passed) << check.name << " observed " << check.observed;
  }
}

TEST(Validate, SignFlipInPairSignIsCaught) {
  ValidationHooks hooks;
  hooks.pair_sign = [](const CornerSet& s, std::size_t i) { return i == 0 ? -pair_sign(s, i) : pair_sign(s, i); };
  const std::vector<Check> checks = run_validation(ExperimentConfig{}, hooks);
  ASSERT_FALSE(checks.empty());
  EXPECT_NE(checks.front().name.find("telescoping"), std::string::npos);
  EXPECT_FALSE(checks.front().passed);
}

TEST(Validate, ReportListsEveryCheck) {
  const std::vector<Check> checks = run_validation(ExperimentConfig{});
  std::ostringstream out;
  print_checks(out, checks);
  const std::string report = out.str();
  for (const Check& c : checks) EXPECT_NE(report.find(c.name), std::string::npos);
}

}  // namespace
