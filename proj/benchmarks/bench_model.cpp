#include <benchmark/benchmark.h>

#include "glyphsmith/car_model.hpp"
#include "glyphsmith/nn.hpp"
#include "glyphsmith/rng.hpp"
#include "glyphsmith/synthetic.hpp"
#include "glyphsmith/trainer.hpp"

using namespace glyphsmith;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, SplitMix64& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

const std::vector<TrainSample>& samples() {
  static const auto s = rasterize_dataset(generate_synthetic(30, 16, Layout{LayoutKind::NL01, std::nullopt}), 64);
  return s;
}

}  // namespace

// Args: input channels, output channels, side.
static void BM_Conv3x3(benchmark::State& state) {
  SplitMix64 rng(1);
  const auto ci = static_cast<std::size_t>(state.range(0)), co = static_cast<std::size_t>(state.range(1)),
             side = static_cast<std::size_t>(state.range(2));
  const Tensor x = random_tensor({ci, side, side}, rng), k = random_tensor({co, ci, 3, 3}, rng),
               b = random_tensor({co}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv3x3(x, k, b));
  state.counters["MFLOP"] = 2.0 * ci * co * 9 * side * side / 1e6;
}
BENCHMARK(BM_Conv3x3)->Args({1, 16, 64})->Args({16, 32, 32})->Args({64, 128, 8});

static void BM_Conv3x3Backward(benchmark::State& state) {
  SplitMix64 rng(2);
  const Tensor x = random_tensor({16, 32, 32}, rng), k = random_tensor({32, 16, 3, 3}, rng),
               dy = random_tensor({32, 32, 32}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv3x3_backward(x, k, dy));
}
BENCHMARK(BM_Conv3x3Backward);

static void BM_ForwardCompose(benchmark::State& state) {
  ModelConfig c;
  c.fusion = static_cast<FusionMode>(state.range(0));
  const CarModel m(c);
  for (auto _ : state) benchmark::DoNotOptimize(m.forward_compose(samples()[0].components));
}
BENCHMARK(BM_ForwardCompose)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_LossAndGradient(benchmark::State& state) {
  const CarModel m(ModelConfig{});
  ParamGrads g = m.zero_grads();
  const auto& s = samples()[0];
  const LossWeights w = default_loss_weights().rescaled_for(64);
  for (auto _ : state) benchmark::DoNotOptimize(m.loss_and_gradient(s.components, s.target, w, &g));
}
BENCHMARK(BM_LossAndGradient)->Unit(benchmark::kMillisecond);

static void BM_TrainEpoch(benchmark::State& state) {
  TrainConfig c;
  c.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(c, samples(), {}));
  state.counters["samples"] = static_cast<double>(samples().size());
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
