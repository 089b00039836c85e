#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mtlw::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

struct TensorData {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until a backward pass touches it
  bool requires_grad = false;
};

/// Reference-counted handle to a dense float64 tensor in row-major order.
///
/// Copies of a Tensor alias the same storage; use clone() for a deep copy.
/// Parameters are leaves created with requires_grad; the optimizer edits
/// their values in place through mutable_values().
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::initializer_list<double> values, bool requires_grad = false);

  bool defined() const noexcept { return data_ != nullptr; }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return values().size(); }
  bool is_scalar() const { return size() == 1; }

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double item() const;
  double operator[](std::size_t i) const { return values()[i]; }

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();  // allocates zeros on first use
  void zero_grad();
  void clear_grad();

  Tensor clone() const;

  // Identity comparison: true when both handles share storage.
  bool same(const Tensor& other) const noexcept { return data_ == other.data_; }

 private:
  explicit Tensor(std::shared_ptr<TensorData> data) : data_(std::move(data)) {}
  TensorData& data() const;

  std::shared_ptr<TensorData> data_;
};

}  // namespace mtlw::ad
