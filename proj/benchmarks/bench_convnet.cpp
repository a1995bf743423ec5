#include <benchmark/benchmark.h>

#include "tssc/convnet.hpp"
#include "tssc/layers.hpp"
#include "tssc/rng.hpp"

namespace {

using namespace tssc;

Tensor random_batch(std::vector<std::size_t> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.data) v = rng.uniform(0.0, 1.0);
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  Rng rng(1);
  const Tensor x = random_batch({8, 8, 32, 32}, 2);
  const Tensor w = random_batch({16, 8, 5, 5}, 3);
  const Tensor b = random_batch({16}, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv2d_forward(x, w, b, 1, 2));
  }
}
BENCHMARK(BM_Conv2dForward)->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const Tensor x = random_batch({8, 8, 32, 32}, 2);
  const Tensor w = random_batch({16, 8, 5, 5}, 3);
  const Tensor b = random_batch({16}, 4);
  const Tensor dy = random_batch({8, 16, 32, 32}, 5);
  Tensor dx, dw, db;
  for (auto _ : state) {
    conv2d_backward(x, w, dy, 1, 2, dx, dw, db);
    benchmark::DoNotOptimize(dx.data.data());
  }
}
BENCHMARK(BM_Conv2dBackward)->Unit(benchmark::kMillisecond);

void BM_HeatmapNetForward(benchmark::State& state) {
  ConvNetModel model = make_heatmap_net(64, 9, 7);
  const Tensor x = random_batch({static_cast<std::size_t>(state.range(0)), 1, 64, 64}, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward(x, false));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HeatmapNetForward)->Arg(1)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SeriesNetForward(benchmark::State& state) {
  ConvNetModel model = make_series_net(1000, 9, 7);
  const Tensor x = random_batch({static_cast<std::size_t>(state.range(0)), 1, 1000}, 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward(x, false));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SeriesNetForward)->Arg(1)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TrainStepHeatmapNet(benchmark::State& state) {
  ConvNetModel model = make_heatmap_net(64, 9, 7);
  SampleSet data;
  data.x = random_batch({64, 1, 64, 64}, 10);
  for (int i = 0; i < 64; ++i) data.labels.push_back(static_cast<std::uint8_t>(i % 9));
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 64;
  for (auto _ : state) {
    train(model, data, cfg);
  }
}
BENCHMARK(BM_TrainStepHeatmapNet)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
