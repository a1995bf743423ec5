#include <benchmark/benchmark.h>

#include "tssc/chaotic_maps.hpp"
#include "tssc/heatmap.hpp"
#include "tssc/triad.hpp"

namespace {

using namespace tssc;

TimeSeries logistic_series(std::size_t n) {
  return normalize_series(iterate_map(map_spec(MapId::Logistic), {3.99}, {1e-6}, n));
}

void BM_IterateMap(benchmark::State& state) {
  const MapSpec& spec = map_spec(MapId::DissipativeStandard);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(iterate_map(spec, {0.5, 5.0}, {0.1, 0.1}, n));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IterateMap)->Arg(2000)->Arg(4000);

void BM_TriadSequence(benchmark::State& state) {
  const TimeSeries ts = logistic_series(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(triad_sequence(ts));
  }
  state.SetItemsProcessed(state.iterations() * (state.range(0) - 2));
}
BENCHMARK(BM_TriadSequence)->Arg(1000)->Arg(2000);

void BM_BandtPompe(benchmark::State& state) {
  const TimeSeries ts = logistic_series(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(bandt_pompe(ts));
  }
}
BENCHMARK(BM_BandtPompe)->Arg(2000)->Arg(100000);

void BM_TsscHeatmap(benchmark::State& state) {
  const TimeSeries ts = logistic_series(2000);
  const auto points = triad_sequence(ts);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tssc_heatmap(points, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_TsscHeatmap)->Arg(8)->Arg(64);

void BM_DcrHeatmap(benchmark::State& state) {
  const TimeSeries ts = logistic_series(2000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dcr_heatmap(ts, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_DcrHeatmap)->Arg(8)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
