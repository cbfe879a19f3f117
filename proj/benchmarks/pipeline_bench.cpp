#include <benchmark/benchmark.h>

#include "pfsensor/placement.hpp"
#include "pfsensor/tracking.hpp"
#include "pfsensor/transfer_operator.hpp"

using namespace pfsensor;

namespace {

FlowScenario vortex(std::size_t n) {
  const StructuredGrid g({n, n, 1}, {1.0 / n, 1.0 / n, 1.0});
  return FlowScenario(synth_recirculating(g, 0.01), 1e-4);
}

}  // namespace

static void BM_BuildMarkov(benchmark::State& state) {
  const FlowScenario s = vortex(static_cast<std::size_t>(state.range(0)));
  const double dt = 0.5 * admissible_dt(s);
  for (auto _ : state) benchmark::DoNotOptimize(build_markov(s, dt));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_BuildMarkov)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_TrackingMatrix(benchmark::State& state) {
  const FlowScenario s = vortex(32);
  const MarkovMatrix p = build_markov(s, 0.5 * admissible_dt(s));
  for (auto _ : state) benchmark::DoNotOptimize(tracking_matrix(p, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_TrackingMatrix)->Arg(10)->Arg(40)->Arg(160)->Unit(benchmark::kMillisecond);

static void BM_PlaceSensors(benchmark::State& state) {
  const std::size_t n = 32;
  const StructuredGrid g({n, n, 1}, {1.0 / n, 1.0 / n, 1.0});
  std::vector<ScaledTrackingMatrix> qs;
  for (int k = 0; k < state.range(0); ++k) {
    const FlowScenario s(synth_recirculating(g, 0.005 * (k + 1)), 1e-4);
    const TrackingMatrix q = tracking_matrix(build_markov(s, 0.5 * admissible_dt(s)), 60);
    qs.push_back(volumetric_scale(threshold(q, SensorSpec(1e-3)), g));
  }
  const std::vector<double> w(qs.size(), 1.0 / static_cast<double>(qs.size()));
  PlacementOptions opt;
  opt.max_sensors = 8;
  for (auto _ : state) benchmark::DoNotOptimize(place_sensors(qs, w, opt));
}
BENCHMARK(BM_PlaceSensors)->Arg(1)->Arg(3)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
