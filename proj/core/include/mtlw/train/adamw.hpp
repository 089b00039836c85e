#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mtlw/autodiff/tensor.hpp"

namespace mtlw::train {

struct AdamWHyper {
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct ParamSlot {
  ad::Tensor tensor;
  bool decay = true;  // false for the uncertainty log-variances
};

struct AdamWState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;
};

/// One AdamW update over every slot, reading each tensor's accumulated grad
/// (absent grads count as zero). Weight decay is decoupled and applied first:
///   p <- p (1 - lr wd);  p <- p - lr m_hat / (sqrt(v_hat) + eps)
/// State is lazily sized on the first step; later mismatches raise StructuralError.
void adamw_step(std::span<ParamSlot> params, AdamWState& state, const AdamWHyper& hyper);

}  // namespace mtlw::train
