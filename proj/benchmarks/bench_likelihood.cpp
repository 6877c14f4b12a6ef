#include <benchmark/benchmark.h>

#include "msstop/brute_force.hpp"
#include "msstop/fit.hpp"
#include "msstop/hmm.hpp"
#include "msstop/layout.hpp"
#include "msstop/scenario.hpp"
#include "msstop/simulate.hpp"

namespace {

using namespace msstop;

void BM_LogLikelihoodScenario(benchmark::State& state) {
  const auto scenario = paper_scenario(static_cast<double>(state.range(0)));
  const auto data = simulate(scenario.params, scenario.design, 1).data;
  for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(data, scenario.params));
  state.counters["unique"] = static_cast<double>(data.unique_count());
}
BENCHMARK(BM_LogLikelihoodScenario)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_ObjectiveScenario(benchmark::State& state) {
  const auto scenario = paper_scenario(static_cast<double>(state.range(0)));
  const auto data = simulate(scenario.params, scenario.design, 1).data;
  const StructureLayout layout(generating_structure(), scenario.design);
  const auto theta = paper_scenario_theta(scenario.params.N, data.observed());
  for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(data, layout.expand(theta, data.observed())));
}
BENCHMARK(BM_ObjectiveScenario)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_NewtHistory(benchmark::State& state) {
  const auto design = newt_design();
  const StructureLayout layout(newt_structure(), design);
  const auto params = layout.expand(layout.default_start(100), 100);
  const auto sim = simulate(params, design, 2);
  const LikelihoodModel model(params, design);
  const auto& h = sim.data.histories().front();
  for (auto _ : state) benchmark::DoNotOptimize(model.log_history_probability(h));
}
BENCHMARK(BM_NewtHistory)->Unit(benchmark::kMicrosecond);

void BM_BruteForceTiny(benchmark::State& state) {
  const StudyDesign design({2, 2}, 2);
  const auto scenario = paper_scenario(100);
  auto params = zero_parameters(design);
  params.N = 10;
  params.r = Eigen::Vector2d(0.6, 0.4);
  params.s.setConstant(0.7);
  for (int t = 0; t < 2; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    params.beta[ti] = Eigen::Vector2d(0.7, 0.3);
    params.phi[ti].setConstant(0.6);
    params.alpha[ti] = scenario.params.alpha[0];
    params.psi[ti] = scenario.params.psi[0];
    for (auto& m : params.p[ti]) m.setConstant(0.5);
  }
  const CaptureHistory h{1, 2, 0, 2};
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_likelihood(h, params, design));
}
BENCHMARK(BM_BruteForceTiny)->Unit(benchmark::kMicrosecond);

void BM_FitSingleStart(benchmark::State& state) {
  const auto scenario = paper_scenario(100);
  const auto data = simulate(scenario.params, scenario.design, 1).data;
  FitOptions options;
  options.starts = 1;
  options.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, generating_structure(), options));
}
BENCHMARK(BM_FitSingleStart)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
