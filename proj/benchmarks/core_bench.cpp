#include <limits>

#include <benchmark/benchmark.h>

#include "mimcmc/estimators.hpp"
#include "mimcmc/gaussian_oracle.hpp"
#include "mimcmc/pcn.hpp"

namespace {

using namespace mimcmc;

// One coupled solve over the full stencil at (x, t).
void BM_CoupledEvaluate(benchmark::State& state) {
  const MultiIndex alpha{static_cast<int>(state.range(0)), static_cast<int>(state.range(1))};
  const ModelParams params;
  const Bases bases;
  const CoupledSolver solver(params, bases, corners(alpha), ObservationConfig::uniform(20, 1.0, 0.1));
  Rng rng = make_rng(1);
  const DrivingNoise noise = draw_noise(solver.finest().modes, solver.finest().steps, rng);
  CornerObservables out;
  for (auto _ : state) {
    solver.evaluate(noise, out);
    benchmark::DoNotOptimize(out.qoi.data());
  }
  state.counters["work_units"] = cost_model(alpha, bases);
}
BENCHMARK(BM_CoupledEvaluate)->Args({1, 1})->Args({4, 2})->Args({6, 3})->Args({8, 4});

// Retained pCN-MH steps per second on the posterior target.
void BM_ChainSteps(benchmark::State& state) {
  const MultiIndex alpha{static_cast<int>(state.range(0)), static_cast<int>(state.range(1))};
  const ModelParams params;
  const ObservationConfig obs = ObservationConfig::uniform(20, 1.0, 0.1);
  const SyntheticData data = generate_data(params, 1024, obs, 7);
  const CoupledTarget target(CoupledSolver(params, Bases{}, corners(alpha), obs), LikelihoodSpec{data.y, 0.1});
  ChainConfig config;
  config.n_steps = 200;
  config.burn_in = 0;
  config.adapt = false;
  config.seed = 3;
  for (auto _ : state) {
    const ChainStats stats = run_chain(target, config, [](const ChainRecord&) {});
    benchmark::DoNotOptimize(stats.acceptance_rate);
  }
  state.SetItemsProcessed(state.iterations() * config.n_steps);
}
BENCHMARK(BM_ChainSteps)->Args({2, 1})->Args({5, 2});

void BM_JointGaussian(benchmark::State& state) {
  const ModelParams params;
  const ObservationConfig obs = ObservationConfig::uniform(20, 1.0, 0.1);
  const long modes = state.range(0);
  const LinearQoI qoi = LinearQoI::make(QoiKind::weighted, modes);
  for (auto _ : state) {
    const GaussianSpec spec = joint_gaussian(params, modes, obs, qoi);
    benchmark::DoNotOptimize(spec.cov.data());
  }
}
BENCHMARK(BM_JointGaussian)->Arg(1 << 10)->Arg(1 << 15)->Unit(benchmark::kMillisecond);

void BM_Conditioning(benchmark::State& state) {
  const ModelParams params;
  const ObservationConfig obs = ObservationConfig::uniform(20, 1.0, 0.1);
  const GaussianSpec prior = joint_gaussian(params, 1024, obs, LinearQoI::make(QoiKind::weighted, 1024));
  const std::vector<double> y(obs.size(), 0.5);
  for (auto _ : state) {
    const GaussianSpec post = condition_on_data(prior, y, 0.1);
    benchmark::DoNotOptimize(post.mean.data());
  }
}
BENCHMARK(BM_Conditioning);

}  // namespace

BENCHMARK_MAIN();
