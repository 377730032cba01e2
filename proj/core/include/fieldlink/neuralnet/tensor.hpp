#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fieldlink::neuralnet {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape) noexcept;
/// "224x224x16"; "50176" for rank 1.
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles. Spatial activations use HWC order.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  /// Throws Error(shape_error) if the value count does not match the shape.
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  void fill(double v);
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

}  // namespace fieldlink::neuralnet
