#include "fieldlink/neuralnet/model.hpp"

#include <cmath>

#include "fieldlink/common/error.hpp"

namespace fieldlink::neuralnet {

Model Model::build(NetworkSpec spec, std::uint64_t seed) {
  const auto shapes = layer_output_shapes(spec);
  Rng rng(seed);
  std::vector<LayerParameters> params(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const Shape& in = i == 0 ? spec.input_shape : shapes[i - 1];
    auto [w_shape, b_shape] = parameter_shapes(spec.layers[i], in);
    if (w_shape.empty()) continue;
    // Glorot: receptive field times channels on each side.
    const double receptive = w_shape.size() == 4 ? static_cast<double>(w_shape[0] * w_shape[1]) : 1.0;
    const double fan_in = receptive * static_cast<double>(w_shape[w_shape.size() - 2]);
    const double fan_out = receptive * static_cast<double>(w_shape.back());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor w(w_shape);
    for (auto& v : w.values()) v = uniform(rng, -limit, limit);
    params[i] = {std::move(w), Tensor(b_shape)};
  }
  return Model(std::move(spec), std::move(params));
}

Model::Model(NetworkSpec spec, std::vector<LayerParameters> parameters)
    : spec_(std::move(spec)), shapes_(layer_output_shapes(spec_)), params_(std::move(parameters)) {
  if (params_.size() != spec_.layers.size()) {
    throw Error(Errc::spec_error, "parameter list does not match layer count");
  }
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const Shape& in = i == 0 ? spec_.input_shape : shapes_[i - 1];
    auto [w_shape, b_shape] = parameter_shapes(spec_.layers[i], in);
    if (params_[i].weights.shape() != w_shape || params_[i].bias.shape() != b_shape) {
      if (w_shape.empty() && params_[i].weights.empty() && params_[i].bias.empty()) continue;
      throw Error(Errc::spec_error, "layer " + std::to_string(i) + " expects weights " + shape_string(w_shape) +
                                        ", got " + shape_string(params_[i].weights.shape()));
    }
  }
}

std::size_t Model::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.weights.size() + p.bias.size();
  return n;
}

Gradients Model::zero_gradients() const {
  Gradients g(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].weights.empty()) continue;
    g[i] = {Tensor(params_[i].weights.shape()), Tensor(params_[i].bias.shape())};
  }
  return g;
}

}  // namespace fieldlink::neuralnet
