#include "fieldlink/neuralnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fieldlink/common/error.hpp"

namespace fieldlink::neuralnet {

std::size_t element_count(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), values_(element_count(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != element_count(shape_)) {
    throw Error(Errc::shape_error, "tensor of shape " + shape_string(shape_) + " needs " +
                                       std::to_string(element_count(shape_)) + " values, got " +
                                       std::to_string(values_.size()));
  }
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace fieldlink::neuralnet
