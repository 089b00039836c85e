#include "mtlw/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtlw/errors.hpp"

namespace mtlw::ad {

namespace {

std::vector<Tensor> copies(std::span<const Tensor> points, bool requires_grad) {
  std::vector<Tensor> out;
  out.reserve(points.size());
  for (const Tensor& p : points) {
    out.push_back(Tensor::from(p.shape(), std::vector<double>(p.values().begin(), p.values().end()), requires_grad));
  }
  return out;
}

double evaluate(const MultiTensorProgram& program, std::span<const Tensor> inputs) {
  Tape tape(false);
  const Tensor y = program(tape, inputs);
  if (!y.is_scalar()) throw StructuralError("grad_check: program must return a scalar");
  return y.item();
}

}  // namespace

GradCheckResult grad_check(const MultiTensorProgram& program, std::span<const Tensor> points, double h,
                           const CoordinateFilter& skip) {
  if (!(h > 0.0)) throw DomainError("grad_check: step h must be positive");

  std::vector<Tensor> leaves = copies(points, true);
  {
    Tape tape;
    const Tensor y = program(tape, leaves);
    if (!y.is_scalar()) throw StructuralError("grad_check: program must return a scalar");
    if (y.requires_grad()) tape.backward(y);
  }

  GradCheckResult result;
  for (std::size_t t = 0; t < points.size(); ++t) {
    for (std::size_t i = 0; i < points[t].size(); ++i) {
      if (skip && skip(t, i)) continue;

      std::vector<Tensor> probe = copies(points, false);
      const double x0 = probe[t].values()[i];
      probe[t].mutable_values()[i] = x0 + h;
      const double f_plus = evaluate(program, probe);
      probe[t].mutable_values()[i] = x0 - h;
      const double f_minus = evaluate(program, probe);

      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double analytic = leaves[t].has_grad() ? leaves[t].grad()[i] : 0.0;
      if (std::isnan(numeric) || std::isnan(analytic)) {
        throw DomainError("grad_check: NaN gradient at tensor " + std::to_string(t) + " element " +
                          std::to_string(i));
      }
      const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
      const double err = std::fabs(analytic - numeric) / denom;
      if (result.checked == 0 || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_tensor = t;
        result.worst_element = i;
      }
      ++result.checked;
    }
  }
  return result;
}

GradCheckResult grad_check(const TensorProgram& program, const Tensor& point, double h,
                           const CoordinateFilter& skip) {
  const Tensor points[] = {point};
  return grad_check([&](Tape& tape, std::span<const Tensor> in) { return program(tape, in[0]); }, points, h,
                    skip);
}

}  // namespace mtlw::ad
