#include <benchmark/benchmark.h>

#include "segaudit/components.hpp"
#include "segaudit/confident_learning.hpp"
#include "segaudit/image_scores.hpp"
#include "segaudit/pixel_scores.hpp"
#include "segaudit/synthetic.hpp"

namespace {

using namespace segaudit;

// One frame at the 762x1280 resolution of typical driving datasets.
const SyntheticImage& Frame() {
  static const SyntheticImage frame = [] {
    SyntheticConfig config;
    config.height = 762;
    config.width = 1280;
    config.num_classes = 12;
    config.min_blob_radius = 40;
    config.max_blob_radius = 200;
    config.seed = 3;
    return GenerateSyntheticImage(config, 0);
  }();
  return frame;
}

void BM_SelfConfidence(benchmark::State& state) {
  const auto& f = Frame();
  for (auto _ : state) benchmark::DoNotOptimize(SelfConfidence(f.probs, f.labels));
}
BENCHMARK(BM_SelfConfidence)->Unit(benchmark::kMillisecond);

void BM_Softmin(benchmark::State& state) {
  const auto& f = Frame();
  const PixelScoreMap s = SelfConfidence(f.probs, f.labels);
  for (auto _ : state) benchmark::DoNotOptimize(Softmin(s));
}
BENCHMARK(BM_Softmin)->Unit(benchmark::kMillisecond);

void BM_ThresholdedCcp(benchmark::State& state) {
  const auto& f = Frame();
  for (auto _ : state) benchmark::DoNotOptimize(ThresholdedCcp(f.probs, f.labels));
}
BENCHMARK(BM_ThresholdedCcp)->Unit(benchmark::kMillisecond);

void BM_Downsample(benchmark::State& state) {
  const auto& f = Frame();
  for (auto _ : state) benchmark::DoNotOptimize(Downsample(f.probs, f.labels, 4));
}
BENCHMARK(BM_Downsample)->Unit(benchmark::kMillisecond);

void BM_CocoPooled(benchmark::State& state) {
  const auto& f = Frame();
  const PooledImage pooled = Downsample(f.probs, f.labels, 4);
  const PredictedMask predicted = PredictedMaskOf(pooled.probs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(CocoScore(pooled.probs, predicted, pooled.labels));
  }
}
BENCHMARK(BM_CocoPooled)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
