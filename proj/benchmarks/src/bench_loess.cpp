#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "fieldlink/analytics/loess.hpp"

using namespace fieldlink::analytics;

namespace {

void BM_LoessFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n), y(n);
  std::iota(x.begin(), x.end(), 0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 3.0);
  for (std::size_t i = 0; i < n; ++i) y[i] = 40.0 + 0.2 * x[i] + noise(rng);
  for (auto _ : state) benchmark::DoNotOptimize(loess_fit(x, y, kDefaultSpan, static_cast<int>(state.range(1))));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LoessFit)->ArgsProduct({{90, 365, 1000}, {1, 2}})->Unit(benchmark::kMicrosecond);

}  // namespace
