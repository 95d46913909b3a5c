#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mimcmc/experiments/commands.hpp"

namespace ex = mimcmc::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Multi-index MCMC experiments for the stochastic heat equation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  unsigned workers = 0;
  bool paper_scale = false;
  bool force = false;
  std::optional<double> sigmas;
  std::string fixture_path = "fixture.json";

  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Experiment seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--paper-scale", paper_scale, "Levels up to (14,7), 30 replicates");

  auto* rates = app.add_subcommand("rates", "Variance of the multi-increments over an index grid");
  auto* cost = app.add_subcommand("cost-error", "Cost vs error of MIMCMC and single-level MCMC");
  auto* validate = app.add_subcommand("validate", "Run the invariant checks");
  validate->add_option("--sigmas", sigmas, "Width of statistical checks in standard errors");
  auto* generate = app.add_subcommand("generate-data", "Write a synthetic data fixture");
  generate->add_option("--fixture", fixture_path, "Fixture file name (relative to --out)");
  generate->add_flag("--force", force, "Overwrite an existing fixture");

  CLI11_PARSE(app, argc, argv);

  try {
    ex::ExperimentConfig config = config_path.empty() ? ex::ExperimentConfig{} : ex::load_config(config_path);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (workers > 0) config.workers = workers;
    if (paper_scale) config.apply_paper_scale();
    if (sigmas) config.validate_sigmas = *sigmas;
    config.validate();

    if (*rates) return ex::cmd_rates(config, std::cout);
    if (*cost) return ex::cmd_cost_error(config, std::cout);
    if (*validate) return ex::cmd_validate(config, std::cout);
    if (*generate) {
      std::filesystem::path path = fixture_path;
      if (path.is_relative()) path = std::filesystem::path(config.output_dir) / path;
      return ex::cmd_generate_data(config, path, force, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
