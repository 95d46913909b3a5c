#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "mimcmc/experiments/commands.hpp"

namespace mimcmc::experiments {

using nlohmann::json;

nlohmann::json fixture_to_json(const Fixture& f) {
  return json{{"format", "mimcmc-fixture"},
              {"version", 1},
              {"seed", f.data.seed},
              {"params",
               {{"theta", f.params.theta},
                {"sigma", f.params.sigma},
                {"final_time", f.params.final_time},
                {"initial_value", f.params.default_initial}}},
              {"max_modes", f.data.max_modes},
              {"tau2", f.observations.tau2},
              {"times", f.observations.times},
              {"y", f.data.y},
              {"noiseless", f.data.noiseless},
              {"truth", f.data.truth}};
}

Fixture fixture_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != "mimcmc-fixture" || j.value("version", 0) != 1) {
    throw std::invalid_argument("not a version-1 fixture");
  }
  Fixture f;
  const json& p = j.at("params");
  f.params.theta = p.at("theta").get<double>();
  f.params.sigma = p.at("sigma").get<double>();
  f.params.final_time = p.at("final_time").get<double>();
  f.params.default_initial = p.at("initial_value").get<double>();
  f.observations.tau2 = j.at("tau2").get<double>();
  f.observations.times = j.at("times").get<std::vector<double>>();
  f.data.seed = j.at("seed").get<std::uint64_t>();
  f.data.max_modes = j.at("max_modes").get<long>();
  f.data.y = j.at("y").get<std::vector<double>>();
  f.data.noiseless = j.at("noiseless").get<std::vector<double>>();
  f.data.truth = j.at("truth").get<std::vector<double>>();
  if (f.data.y.size() != f.observations.size()) throw std::invalid_argument("fixture y has the wrong length");
  return f;
}

Fixture read_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing fixture " + path.string());
  return fixture_from_json(json::parse(in));
}

Fixture make_fixture(const ExperimentConfig& config) {
  Fixture f;
  f.params = config.params;
  f.observations = config.observations();
  f.data = generate_data(config.params, config.max_modes, f.observations, config.seed);
  return f;
}

Fixture resolve_fixture(const ExperimentConfig& config) {
  if (config.fixture.empty()) return make_fixture(config);
  Fixture f = read_fixture(config.fixture);
  const ObservationConfig expected = config.observations();
  if (f.observations.times.size() != expected.times.size() || f.observations.tau2 != expected.tau2 ||
      f.params.theta != config.params.theta || f.params.sigma != config.params.sigma ||
      f.params.final_time != config.params.final_time) {
    throw std::invalid_argument("fixture " + config.fixture + " does not match the configured model");
  }
  return f;
}

double oracle_posterior_mean(const ExperimentConfig& config, const std::vector<double>& y) {
  const GaussianSpec joint = joint_gaussian(config.params, config.max_modes, config.observations(),
                                            LinearQoI::make(config.qoi, config.max_modes));
  return qoi_moments(condition_on_data(joint, y, config.tau2)).mean;
}

int cmd_generate_data(const ExperimentConfig& config, const std::filesystem::path& path, bool force,
                      std::ostream& log) {
  if (std::filesystem::exists(path) && !force) {
    log << "error: " << path.string() << " exists; pass --force to overwrite\n";
    return 2;
  }
  const Fixture fixture = make_fixture(config);
  const json j = fixture_to_json(fixture);
  write_json(path, j);
  const Fixture back = read_fixture(path);
  if (back.data.y != fixture.data.y || back.data.truth != fixture.data.truth) {
    log << "error: fixture did not round-trip\n";
    return 1;
  }
  log << "wrote " << path.string() << " (seed " << config.seed << ", hash " << hex64(fnv1a(j.dump())) << ")\n";
  return 0;
}

}  // namespace mimcmc::experiments
