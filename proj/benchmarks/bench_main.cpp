#include <benchmark/benchmark.h>

#include "coinflow/exact.hpp"
#include "coinflow/oracle.hpp"
#include "coinflow/rng.hpp"
#include "coinflow/simulation.hpp"

using namespace coinflow;

static void BM_StepIndividual(benchmark::State& state) {
  const auto g = GraphTopology::build_named(NamedGraph::complete, 100);
  const ModelParams p{ModelKind::individual, 500, 3};
  SimulationConfig cfg;
  cfg.samples = static_cast<std::uint64_t>(state.range(0));
  cfg.collectors = {false, false, false, false};
  cfg.check_invariants = false;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(g, p, cfg).transfers);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StepIndividual)->Arg(1 << 20);

static void BM_StepCollective(benchmark::State& state) {
  const auto g = GraphTopology::build_named(NamedGraph::complete, 1000);
  const ModelParams p{ModelKind::collective, 50000, 10000};
  SimulationConfig cfg;
  cfg.samples = static_cast<std::uint64_t>(state.range(0));
  cfg.collectors = {false, false, true, true};
  cfg.check_invariants = false;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(g, p, cfg).transfers);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StepCollective)->Arg(1 << 20);

static void BM_LambdaY(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(lambda_y(n, 10 * n, 2 * n));
}
BENCHMARK(BM_LambdaY)->Arg(10)->Arg(100);

static void BM_LogMarginalCollective(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(marginal_collective_log(100, 50000, 10000).log_mass.size());
}
BENCHMARK(BM_LogMarginalCollective)->Unit(benchmark::kMillisecond);

static void BM_StationarySolve(benchmark::State& state) {
  const auto g = GraphTopology::build_named(NamedGraph::cycle, 4);
  const ModelParams p{ModelKind::collective, 5, 3};
  const auto m = transition_matrix(g, p, enumerate_collective(4, 5, 3));
  for (auto _ : state) benchmark::DoNotOptimize(stationary(m).size());
  state.counters["states"] = static_cast<double>(m.size());
}
BENCHMARK(BM_StationarySolve)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
