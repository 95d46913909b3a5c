#ifndef MIMCMC_EXPERIMENTS_CONFIG_HPP
#define MIMCMC_EXPERIMENTS_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mimcmc/estimators.hpp"
#include "mimcmc/gaussian_oracle.hpp"
#include "mimcmc/pcn.hpp"
#include "mimcmc/spde.hpp"

namespace mimcmc::experiments {

struct RatesSettings {
  int max_level_x = 5;
  int max_level_t = 5;
  std::int64_t samples = 10000;
  /// Steps of an additional posterior chain per index; 0 skips var_chain.
  std::int64_t chain_samples = 0;
};

struct CostErrorSettings {
  /// Time levels L; each runs the precision level (2L, L) with eps = 2^(1 - L).
  std::vector<int> levels{1, 2, 3, 4};
  int replicates = 10;
};

struct ExperimentConfig {
  ModelParams params;
  Bases bases;
  int observation_count = 20;
  double tau2 = 0.1;
  long max_modes = kDefaultMaxModes;
  QoiKind qoi = QoiKind::weighted;
  std::uint64_t seed = 20240917;
  ChainConfig chain;
  RatesSettings rates;
  CostErrorSettings cost_error;
  int max_level_x = 8;
  int max_level_t = 4;
  std::int64_t max_chain_length = 1000000;
  std::string fixture;
  unsigned workers = 1;
  std::string output_dir = "results";
  bool paper_scale = false;
  /// Width, in standard errors, of the statistical checks of `validate`.
  double validate_sigmas = 4.0;

  [[nodiscard]] ObservationConfig observations() const;
  [[nodiscard]] MimcmcProblem problem(std::vector<double> y) const;
  /// Levels up to (14, 7), time levels 1..7 and 30 replicates.
  void apply_paper_scale();
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string to_string(QoiKind kind);
QoiKind qoi_from_string(std::string_view name);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Sets `section` of dir/summary.json, keeping the other sections, and echoes the
/// effective config to dir/config.json.
void update_summary(const std::filesystem::path& dir, const std::string& section, const nlohmann::json& value,
                    const ExperimentConfig& config);

}  // namespace mimcmc::experiments

#endif
