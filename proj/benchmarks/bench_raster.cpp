#include <benchmark/benchmark.h>

#include "glyphsmith/raster.hpp"
#include "glyphsmith/synthetic.hpp"
#include "glyphsmith/warp.hpp"

using namespace glyphsmith;

namespace {

const VectorGlyph& sample_glyph() {
  static const SyntheticDataset d = generate_synthetic(30, 1, Layout{LayoutKind::NL01, std::nullopt});
  return d.samples[0].target;
}

GridAffine some_theta() { return GridAffine{{{0.9, 0.05, 0.1, -0.03, 1.1, -0.2}}}; }

}  // namespace

static void BM_Render(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(render(sample_glyph(), RenderFrame{size, 1000, 0, 0}, true));
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_Render)->Arg(64)->Arg(256);

static void BM_WarpForward(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Raster img = render(sample_glyph(), RenderFrame{size, 1000, 0, 0}, true).raster;
  const GridAffine theta = some_theta();
  for (auto _ : state) benchmark::DoNotOptimize(warp_forward(img, theta));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_WarpForward)->Arg(64)->Arg(256);

static void BM_WarpBackward(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Raster img = render(sample_glyph(), RenderFrame{size, 1000, 0, 0}, true).raster;
  const Raster upstream(size, size, 0.25);
  const GridAffine theta = some_theta();
  for (auto _ : state) benchmark::DoNotOptimize(warp_backward(img, theta, upstream));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_WarpBackward)->Arg(64)->Arg(256);

static void BM_Moments(benchmark::State& state) {
  const Raster img = render(sample_glyph(), RenderFrame{64, 1000, 0, 0}, true).raster;
  for (auto _ : state) {
    benchmark::DoNotOptimize(centroid(img));
    benchmark::DoNotOptimize(inertia(img));
  }
}
BENCHMARK(BM_Moments);
