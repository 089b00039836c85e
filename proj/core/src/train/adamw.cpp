#include "mtlw/train/adamw.hpp"

#include <cmath>
#include <string>

#include "mtlw/errors.hpp"

namespace mtlw::train {

void adamw_step(std::span<ParamSlot> params, AdamWState& state, const AdamWHyper& hyper) {
  if (state.step == 0 && state.m.empty()) {
    for (const ParamSlot& p : params) {
      state.m.emplace_back(p.tensor.size(), 0.0);
      state.v.emplace_back(p.tensor.size(), 0.0);
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw StructuralError("adamw_step: optimizer state tracks " + std::to_string(state.m.size()) +
                          " tensors, got " + std::to_string(params.size()));
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(hyper.beta1, t);
  const double bias2 = 1.0 - std::pow(hyper.beta2, t);
  const double lr = hyper.learning_rate;

  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Tensor& tensor = params[i].tensor;
    std::vector<double>& m = state.m[i];
    std::vector<double>& v = state.v[i];
    if (m.size() != tensor.size() || v.size() != tensor.size()) {
      throw StructuralError("adamw_step: state shape mismatch for tensor " + std::to_string(i));
    }
    auto values = tensor.mutable_values();
    const auto grad = tensor.grad();
    const bool has_grad = !grad.empty();
    const double decay = params[i].decay ? 1.0 - lr * hyper.weight_decay : 1.0;

    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = has_grad ? grad[j] : 0.0;
      values[j] *= decay;
      m[j] = hyper.beta1 * m[j] + (1.0 - hyper.beta1) * g;
      v[j] = hyper.beta2 * v[j] + (1.0 - hyper.beta2) * g * g;
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      values[j] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
  }
}

}  // namespace mtlw::train
