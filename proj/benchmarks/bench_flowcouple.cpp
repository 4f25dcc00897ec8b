#include <benchmark/benchmark.h>

#include "flowcouple/coupling.hpp"
#include "flowcouple/ctmc.hpp"
#include "flowcouple/ordering.hpp"
#include "flowcouple/tandem.hpp"

using namespace flowcouple;

static TandemParams params(int s) { return TandemParams::linear_service(s, s, 1.0, 1.0, 1.0); }

static void BM_SimulatePath(benchmark::State& state) {
  NetworkSpec spec = build_original_tandem(params(static_cast<int>(state.range(0))));
  std::uint64_t seed = 0;
  std::size_t events = 0;
  for (auto _ : state) {
    auto log = simulate_path(spec, {0, 0}, 100.0, ++seed);
    events += log.events.size();
    benchmark::DoNotOptimize(log);
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulatePath)->Arg(3)->Arg(10);

static void BM_SimulateCoupled(benchmark::State& state) {
  TandemParams p = params(static_cast<int>(state.range(0)));
  NetworkSpec bal = build_balanced_tandem(p), orig = build_original_tandem(p);
  CoupledSpec c = build_stateflow_coupling(bal, orig);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto log = simulate_coupled(c, {0, 0}, {0, 0}, 50.0, ++seed);
    benchmark::DoNotOptimize(log);
  }
}
BENCHMARK(BM_SimulateCoupled)->Arg(3)->Arg(10);

static void BM_StationaryDistribution(benchmark::State& state) {
  NetworkSpec spec = build_balanced_tandem(params(static_cast<int>(state.range(0))));
  Generator gen(spec);
  for (auto _ : state) benchmark::DoNotOptimize(stationary_distribution(gen));
  state.SetLabel(std::to_string(spec.size()) + " states");
}
BENCHMARK(BM_StationaryDistribution)->Arg(2)->Arg(10)->Arg(30);

static void BM_TransientMeanFlow(benchmark::State& state) {
  NetworkSpec spec = build_original_tandem(params(static_cast<int>(state.range(0))));
  auto p0 = point_mass(spec, {0, 0});
  std::vector<double> times;
  for (int t = 0; t <= 20; ++t) times.push_back(t);
  for (auto _ : state) benchmark::DoNotOptimize(transient_mean_flow_curve(spec, p0, 0, times, 1e-10));
}
BENCHMARK(BM_TransientMeanFlow)->Arg(3)->Arg(10);

static void BM_CheckFlowConditions(benchmark::State& state) {
  TandemParams p = params(static_cast<int>(state.range(0)));
  NetworkSpec bal = build_balanced_tandem(p), orig = build_original_tandem(p);
  for (auto _ : state) benchmark::DoNotOptimize(check_flow_conditions(bal, orig));
}
BENCHMARK(BM_CheckFlowConditions)->Arg(3)->Arg(10);

static void BM_VerifyTightConfigurations(benchmark::State& state) {
  TandemParams p = params(static_cast<int>(state.range(0)));
  NetworkSpec bal = build_balanced_tandem(p), orig = build_original_tandem(p);
  for (auto _ : state) benchmark::DoNotOptimize(verify_tight_configurations(bal, orig, sufficient_gap_bound(bal, orig)));
}
BENCHMARK(BM_VerifyTightConfigurations)->Arg(3)->Arg(6);
BENCHMARK_MAIN();
