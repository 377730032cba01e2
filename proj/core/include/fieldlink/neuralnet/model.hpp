#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fieldlink/neuralnet/network_spec.hpp"
#include "fieldlink/neuralnet/rng.hpp"
#include "fieldlink/neuralnet/tensor.hpp"

namespace fieldlink::neuralnet {

// Weights and bias of one layer. Both are empty for parameterless layers.
struct LayerParameters {
  Tensor weights;
  Tensor bias;

  friend bool operator==(const LayerParameters&, const LayerParameters&) = default;
};

using Gradients = std::vector<LayerParameters>;

class Model {
 public:
  /// Glorot-uniform weights drawn from `seed`, zero biases.
  /// Throws Error(spec_error) if the spec does not chain.
  static Model build(NetworkSpec spec, std::uint64_t seed);

  /// Adopts existing parameters; throws Error(spec_error) on a shape mismatch.
  Model(NetworkSpec spec, std::vector<LayerParameters> parameters);

  const NetworkSpec& spec() const noexcept { return spec_; }
  const std::vector<Shape>& output_shapes() const noexcept { return shapes_; }
  const Shape& input_shape() const noexcept { return spec_.input_shape; }

  std::vector<LayerParameters>& parameters() noexcept { return params_; }
  const std::vector<LayerParameters>& parameters() const noexcept { return params_; }

  std::size_t parameter_count() const noexcept;

  /// Zero-valued gradient buffers with this model's parameter shapes.
  Gradients zero_gradients() const;

  friend bool operator==(const Model& a, const Model& b) { return a.params_ == b.params_ && a.shapes_ == b.shapes_; }

 private:
  NetworkSpec spec_;
  std::vector<Shape> shapes_;
  std::vector<LayerParameters> params_;
};

enum class Mode { train, infer };

// Cached activations of one forward pass; the input to backward().
struct ForwardPass {
  std::vector<Tensor> activations;               // [0] = input, [i + 1] = output of layer i
  std::vector<std::vector<double>> dropout_scale;  // per layer; empty unless a train-mode dropout ran
  std::vector<double> logits;                    // final layer before softmax
  std::vector<double> probabilities;             // softmax(logits)
};

/// Runs the network. Dropout is the identity in infer mode; in train mode it
/// draws its mask from `rng`, which must then be non-null.
/// Throws Error(shape_error) if `input` does not match the model input shape.
ForwardPass forward(const Model& model, const Tensor& input, Mode mode, Rng* rng = nullptr);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// Categorical cross-entropy of a forward pass against `label`.
double cross_entropy(const ForwardPass& pass, std::size_t label);

/// Back-propagates softmax cross-entropy for `label`, adding parameter
/// gradients into `grads`. Returns the loss.
double backward(const Model& model, const ForwardPass& pass, std::size_t label, Gradients& grads);

struct Prediction {
  std::vector<double> probabilities;
  std::size_t top_index;  // argmax; ties go to the lowest index
};

Prediction predict(const Model& model, const Tensor& input);

std::size_t argmax(std::span<const double> values) noexcept;

}  // namespace fieldlink::neuralnet
