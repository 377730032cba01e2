#include <benchmark/benchmark.h>

#include "fieldlink/neuralnet/dataset.hpp"
#include "fieldlink/neuralnet/model.hpp"

using namespace fieldlink;
using namespace fieldlink::neuralnet;

namespace {

Model model_for(int64_t which) {
  return Model::build(which == 0 ? NetworkSpec::compact() : NetworkSpec::canonical(), 1);
}

Tensor leaf_tensor(const Model& model) {
  vegindex::RgbImage img(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) img.set(x, y, static_cast<std::uint8_t>(x * 4), static_cast<std::uint8_t>(120 + y), 40);
  }
  return image_to_tensor(img, model.input_shape());
}

// Arg 0 is the compact network, 1 the full-size one.
void BM_Predict(benchmark::State& state) {
  const auto model = model_for(state.range(0));
  const auto input = leaf_tensor(model);
  for (auto _ : state) benchmark::DoNotOptimize(predict(model, input));
}
BENCHMARK(BM_Predict)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto model = model_for(state.range(0));
  const auto input = leaf_tensor(model);
  auto grads = model.zero_gradients();
  for (auto _ : state) {
    const auto pass = forward(model, input, Mode::infer);
    benchmark::DoNotOptimize(backward(model, pass, 2, grads));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
