#include "mimcmc/experiments/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace mimcmc::experiments {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) throw std::invalid_argument("unknown config key " + where + item.key());
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// tau2 = "inf" switches the likelihood off.
double read_variance(const json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

}  // namespace

ObservationConfig ExperimentConfig::observations() const {
  return ObservationConfig::uniform(observation_count, params.final_time, tau2);
}

MimcmcProblem ExperimentConfig::problem(std::vector<double> y) const {
  MimcmcProblem p;
  p.params = params;
  p.bases = bases;
  p.observations = observations();
  p.likelihood = LikelihoodSpec{std::move(y), tau2};
  p.qoi = qoi;
  p.chain = chain;
  return p;
}

void ExperimentConfig::apply_paper_scale() {
  paper_scale = true;
  max_level_x = 14;
  max_level_t = 7;
  cost_error.levels = {1, 2, 3, 4, 5, 6, 7};
  cost_error.replicates = 30;
}

void ExperimentConfig::validate() const {
  params.validate();
  if (bases.modes < 1 || bases.steps < 1) throw std::invalid_argument("base resolutions must be positive");
  if (observation_count < 1) throw std::invalid_argument("need at least one observation time");
  if (bases.steps % observation_count != 0) {
    throw std::invalid_argument("observation count must divide the base step count");
  }
  if (!(tau2 > 0.0)) throw std::invalid_argument("tau2 must be positive");
  if (max_modes < 1) throw std::invalid_argument("max_modes must be positive");
  chain.validate();
  if (rates.max_level_x < 0 || rates.max_level_t < 0) throw std::invalid_argument("rate levels must be >= 0");
  if (rates.samples < 2) throw std::invalid_argument("rates need at least two samples per index");
  if (rates.chain_samples < 0) throw std::invalid_argument("rates.chain_samples must be >= 0");
  if (cost_error.replicates < 1) throw std::invalid_argument("need at least one replicate");
  for (int level : cost_error.levels) {
    if (level < 1) throw std::invalid_argument("cost-error time levels start at 1");
    if (2 * level > max_level_x || level > max_level_t) {
      throw std::invalid_argument("precision level (" + std::to_string(2 * level) + "," + std::to_string(level) +
                                  ") exceeds the configured maxima");
    }
  }
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (!(validate_sigmas > 0.0)) throw std::invalid_argument("validate_sigmas must be positive");
}

std::string to_string(QoiKind kind) { return kind == QoiKind::weighted ? "weighted" : "point"; }

QoiKind qoi_from_string(std::string_view name) {
  if (name == "weighted") return QoiKind::weighted;
  if (name == "point") return QoiKind::point;
  throw std::invalid_argument("qoi must be \"weighted\" or \"point\"");
}

json to_json(const ExperimentConfig& c) {
  json chain{{"rho", c.chain.rho},
             {"adapt", c.chain.adapt},
             {"target_low", c.chain.target_low},
             {"target_high", c.chain.target_high},
             {"tune_window", c.chain.tune_window}};
  chain["burn_in"] = c.chain.burn_in ? json(*c.chain.burn_in) : json(nullptr);
  return json{
      {"theta", c.params.theta},
      {"sigma", c.params.sigma},
      {"final_time", c.params.final_time},
      {"initial_value", c.params.default_initial},
      {"base_modes", c.bases.modes},
      {"base_steps", c.bases.steps},
      {"observations", c.observation_count},
      {"tau2", std::isinf(c.tau2) ? json("inf") : json(c.tau2)},
      {"max_modes", c.max_modes},
      {"qoi", to_string(c.qoi)},
      {"seed", c.seed},
      {"chain", chain},
      {"rates",
       {{"max_level_x", c.rates.max_level_x},
        {"max_level_t", c.rates.max_level_t},
        {"samples", c.rates.samples},
        {"chain_samples", c.rates.chain_samples}}},
      {"cost_error", {{"levels", c.cost_error.levels}, {"replicates", c.cost_error.replicates}}},
      {"max_level_x", c.max_level_x},
      {"max_level_t", c.max_level_t},
      {"max_chain_length", c.max_chain_length},
      {"fixture", c.fixture},
      {"workers", c.workers},
      {"output_dir", c.output_dir},
      {"paper_scale", c.paper_scale},
      {"validate_sigmas", c.validate_sigmas},
  };
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"theta", "sigma", "final_time", "initial_value", "base_modes", "base_steps", "observations",
                  "tau2", "max_modes", "qoi", "seed", "chain", "rates", "cost_error", "max_level_x",
                  "max_level_t", "max_chain_length", "fixture", "workers", "output_dir", "paper_scale",
                  "validate_sigmas"},
                 "");
  ExperimentConfig c;
  read(j, "theta", c.params.theta);
  read(j, "sigma", c.params.sigma);
  read(j, "final_time", c.params.final_time);
  read(j, "initial_value", c.params.default_initial);
  read(j, "base_modes", c.bases.modes);
  read(j, "base_steps", c.bases.steps);
  read(j, "observations", c.observation_count);
  if (j.contains("tau2")) c.tau2 = read_variance(j.at("tau2"));
  read(j, "max_modes", c.max_modes);
  if (j.contains("qoi")) c.qoi = qoi_from_string(j.at("qoi").get<std::string>());
  read(j, "seed", c.seed);
  if (j.contains("chain")) {
    const json& ch = j.at("chain");
    reject_unknown(ch, {"rho", "adapt", "burn_in", "target_low", "target_high", "tune_window"}, "chain.");
    read(ch, "rho", c.chain.rho);
    read(ch, "adapt", c.chain.adapt);
    read(ch, "target_low", c.chain.target_low);
    read(ch, "target_high", c.chain.target_high);
    read(ch, "tune_window", c.chain.tune_window);
    if (ch.contains("burn_in") && !ch.at("burn_in").is_null()) c.chain.burn_in = ch.at("burn_in").get<std::int64_t>();
  }
  if (j.contains("rates")) {
    const json& r = j.at("rates");
    reject_unknown(r, {"max_level_x", "max_level_t", "samples", "chain_samples"}, "rates.");
    read(r, "max_level_x", c.rates.max_level_x);
    read(r, "max_level_t", c.rates.max_level_t);
    read(r, "samples", c.rates.samples);
    read(r, "chain_samples", c.rates.chain_samples);
  }
  if (j.contains("cost_error")) {
    const json& e = j.at("cost_error");
    reject_unknown(e, {"levels", "replicates"}, "cost_error.");
    read(e, "levels", c.cost_error.levels);
    read(e, "replicates", c.cost_error.replicates);
  }
  read(j, "max_level_x", c.max_level_x);
  read(j, "max_level_t", c.max_level_t);
  read(j, "max_chain_length", c.max_chain_length);
  read(j, "fixture", c.fixture);
  read(j, "workers", c.workers);
  read(j, "output_dir", c.output_dir);
  read(j, "validate_sigmas", c.validate_sigmas);
  if (j.value("paper_scale", false)) c.apply_paper_scale();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return config_from_json(json::parse(in));
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void update_summary(const std::filesystem::path& dir, const std::string& section, const json& value,
                    const ExperimentConfig& config) {
  const std::filesystem::path path = dir / "summary.json";
  json summary = json::object();
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    summary = json::parse(in, nullptr, false);
    if (summary.is_discarded() || !summary.is_object()) summary = json::object();
  }
  summary[section] = value;
  write_json(path, summary);
  write_json(dir / "config.json", to_json(config));
}

}  // namespace mimcmc::experiments
