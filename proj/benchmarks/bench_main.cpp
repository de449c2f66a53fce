#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "aquacast/forecast.hpp"
#include "aquacast/kmeans.hpp"
#include "aquacast/models.hpp"
#include "aquacast/nn/train.hpp"
#include "aquacast/series.hpp"

namespace {

using namespace aquacast;

SyntheticConfig bench_config() {
  SyntheticConfig config;
  config.n_samples = 4000;
  config.noise_std = 0.03;
  config.spike_rate = 0.0;
  config.seed = 7;
  return config;
}

struct Fixture {
  DemandSeries series;
  Scaler scaler;
  KMeansModel kmeans;
  Model dcgru;

  Fixture()
      : series(generate_synthetic(bench_config())),
        scaler(fit_scaler(series)),
        kmeans(lloyd(series.values, 4, 11)),
        dcgru(build_dcgru(4, 11)) {}
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_GruLayerForward(benchmark::State& state) {
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  nn::GRULayer layer(1, 32, nn::Activation::Sigmoid, nn::Activation::Tanh,
                     true);
  std::mt19937_64 rng(3);
  nn::xavier_fill(layer.w_z, 1, 32, rng);
  nn::xavier_fill(layer.u_z, 32, 32, rng);
  nn::xavier_fill(layer.w_r, 1, 32, rng);
  nn::xavier_fill(layer.u_r, 32, 32, rng);
  nn::xavier_fill(layer.w_h, 1, 32, rng);
  nn::xavier_fill(layer.u_h, 32, 32, rng);
  nn::Sequence input(kSamplesPerDay, nn::Matrix::Constant(batch, 1, 0.5));
  for (auto _ : state) {
    benchmark::DoNotOptimize(layer.forward(input, false));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_GruLayerForward)->Arg(1)->Arg(100);

void BM_PredictOne(benchmark::State& state) {
  const Fixture& f = fixture();
  const std::size_t target = f.series.size();
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_one_at(f.dcgru, f.series.values, target,
                                            f.scaler, &f.kmeans));
  }
}
BENCHMARK(BM_PredictOne);

void BM_PredictDay(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        predict_day(f.dcgru, f.series.values, &f.kmeans, f.scaler));
  }
}
BENCHMARK(BM_PredictDay)->Unit(benchmark::kMillisecond);

void BM_Lloyd(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(lloyd(f.series.values, 4, 11));
  }
}
BENCHMARK(BM_Lloyd)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const Fixture& f = fixture();
  const std::size_t end = 2000;
  const nn::WindowDataset train_set =
      build_windows(f.dcgru, std::span(f.series.values).first(end), f.scaler,
                    &f.kmeans, kSamplesPerDay, end);
  const nn::WindowDataset val_set =
      build_windows(f.dcgru, std::span(f.series.values).first(end + 300),
                    f.scaler, &f.kmeans, end, end + 300);
  for (auto _ : state) {
    Model model = build_dcgru(4, 11);
    nn::TrainConfig config;
    config.max_epochs = 1;
    config.early_stop_patience = 10;
    benchmark::DoNotOptimize(
        nn::train(model.net, train_set, val_set, config));
  }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
