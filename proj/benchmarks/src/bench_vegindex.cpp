#include <benchmark/benchmark.h>

#include <random>

#include "fieldlink/vegindex/heatmap.hpp"
#include "fieldlink/vegindex/image.hpp"
#include "fieldlink/vegindex/index.hpp"

using namespace fieldlink::vegindex;

namespace {

RgbImage noise_image(int side) {
  RgbImage img(side, side);
  std::mt19937 rng(side);
  std::uniform_int_distribution<int> v(0, 255);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      img.set(x, y, static_cast<std::uint8_t>(v(rng)), static_cast<std::uint8_t>(v(rng)), static_cast<std::uint8_t>(v(rng)));
    }
  }
  return img;
}

void BM_IndexMap(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)));
  const auto kind = state.range(1) == 0 ? IndexKind::tgi : IndexKind::grvi;
  for (auto _ : state) {
    auto map = compute_index(to_reflectance(img), kind);
    benchmark::DoNotOptimize(map.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_IndexMap)->ArgsProduct({{224, 1024}, {0, 1}});

void BM_Summary(benchmark::State& state) {
  const auto map = compute_index(to_reflectance(noise_image(static_cast<int>(state.range(0)))), IndexKind::tgi);
  for (auto _ : state) benchmark::DoNotOptimize(summarize_index(map));
}
BENCHMARK(BM_Summary)->Arg(224)->Arg(1024);

void BM_Heatmap(benchmark::State& state) {
  const auto map = compute_index(to_reflectance(noise_image(static_cast<int>(state.range(0)))), IndexKind::grvi);
  for (auto _ : state) benchmark::DoNotOptimize(render_heatmap(map));
}
BENCHMARK(BM_Heatmap)->Arg(224)->Arg(1024);

}  // namespace
