#include <benchmark/benchmark.h>

#include "tastesim/dynamics.hpp"
#include "tastesim/experiments.hpp"
#include "tastesim/metrics.hpp"

using namespace tastesim;

namespace {

WorldState warm_world(const ScenarioConfig& c, Rng& rng, int steps) {
  auto w = init_world(c, rng);
  for (int t = 0; t < steps; ++t) step(w, c, rng);
  return w;
}

}  // namespace

static void BM_BuildPool(benchmark::State& state) {
  auto c = preset("kpop");
  c.alpha = static_cast<double>(state.range(0)) / 100.0;
  Rng rng(1);
  const auto w = warm_world(c, rng, 10);
  const auto ranking = popularity_ranking(w.plays, rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_pool(w.agents[i++ % w.n_agents()], w, c, ranking, rng));
  }
}
BENCHMARK(BM_BuildPool)->Arg(0)->Arg(65)->Arg(95);

static void BM_GumbelTopK(benchmark::State& state) {
  std::vector<double> u(static_cast<std::size_t>(state.range(0)));
  Rng rng(2);
  for (auto& v : u) v = rng.normal(0.0, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(gumbel_top_k(u, 5, rng));
}
BENCHMARK(BM_GumbelTopK)->Arg(10)->Arg(18)->Arg(80);

static void BM_Step(benchmark::State& state) {
  const auto c = preset("brazil");
  Rng rng(3);
  const auto start = warm_world(c, rng, 5);
  for (auto _ : state) {
    state.PauseTiming();
    auto w = start;
    state.ResumeTiming();
    benchmark::DoNotOptimize(step(w, c, rng));
  }
}
BENCHMARK(BM_Step)->Unit(benchmark::kMicrosecond);

static void BM_Gini(benchmark::State& state) {
  std::vector<std::uint64_t> counts(80);
  Rng rng(4);
  for (auto& v : counts) v = rng.index(5000);
  for (auto _ : state) benchmark::DoNotOptimize(gini(counts));
}
BENCHMARK(BM_Gini);

static void BM_RunScenario(benchmark::State& state) {
  const auto c = preset("sanremo");
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(c, seed++));
}
BENCHMARK(BM_RunScenario)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
