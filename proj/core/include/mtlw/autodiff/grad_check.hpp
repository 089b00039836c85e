#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mtlw/autodiff/tape.hpp"
#include "mtlw/autodiff/tensor.hpp"

namespace mtlw::ad {

using TensorProgram = std::function<Tensor(Tape&, const Tensor&)>;
using MultiTensorProgram = std::function<Tensor(Tape&, std::span<const Tensor>)>;

// Returns true for a (tensor index, element index) coordinate that must be
// left out of the comparison, e.g. a relu input sitting exactly on its kink.
using CoordinateFilter = std::function<bool(std::size_t tensor, std::size_t element)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_tensor = 0;
  std::size_t worst_element = 0;
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients of a scalar program against central
/// differences, coordinate by coordinate. The relative error of one
/// coordinate is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// Throws DomainError when either gradient contains NaN.
GradCheckResult grad_check(const MultiTensorProgram& program, std::span<const Tensor> points, double h,
                           const CoordinateFilter& skip = {});

GradCheckResult grad_check(const TensorProgram& program, const Tensor& point, double h,
                           const CoordinateFilter& skip = {});

}  // namespace mtlw::ad
