#include "mtlw/autodiff/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "mtlw/errors.hpp"

namespace mtlw::ad {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw StructuralError("tensor dimensions must be positive, got " + shape_to_string(shape));
  }
  if (shape_size(shape) != values.size()) {
    throw StructuralError("shape " + shape_to_string(shape) + " does not match " +
                          std::to_string(values.size()) + " values");
  }
  auto data = std::make_shared<TensorData>();
  data->shape = std::move(shape);
  data->values = std::move(values);
  data->requires_grad = requires_grad;
  return Tensor(std::move(data));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

Tensor Tensor::vector(std::initializer_list<double> values, bool requires_grad) {
  return from({values.size()}, std::vector<double>(values), requires_grad);
}

TensorData& Tensor::data() const {
  if (!data_) throw StructuralError("use of an undefined tensor");
  return *data_;
}

const Shape& Tensor::shape() const { return data().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw StructuralError("axis " + std::to_string(axis) + " out of range for shape " + shape_to_string(s));
  }
  return s[axis];
}

std::span<const double> Tensor::values() const { return data().values; }
std::span<double> Tensor::mutable_values() { return data().values; }

double Tensor::item() const {
  if (size() != 1) throw StructuralError("item() on non-scalar tensor " + shape_to_string(shape()));
  return data().values[0];
}

bool Tensor::requires_grad() const { return data().requires_grad; }
bool Tensor::has_grad() const { return !data().grad.empty(); }
std::span<const double> Tensor::grad() const { return data().grad; }

std::span<double> Tensor::mutable_grad() {
  TensorData& d = data();
  if (d.grad.empty()) d.grad.assign(d.values.size(), 0.0);
  return d.grad;
}

void Tensor::zero_grad() {
  TensorData& d = data();
  if (!d.grad.empty()) std::fill(d.grad.begin(), d.grad.end(), 0.0);
}

void Tensor::clear_grad() { data().grad.clear(); }

Tensor Tensor::clone() const {
  const TensorData& d = data();
  auto copy = std::make_shared<TensorData>(d);
  return Tensor(std::move(copy));
}

}  // namespace mtlw::ad
