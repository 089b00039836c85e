#pragma once

#include <cstddef>
#include <span>

#include "mtlw/autodiff/tape.hpp"
#include "mtlw/autodiff/tensor.hpp"

// Differentiable tensor operations. Every function computes its result
// eagerly; when the tape is recording and any operand requires grad, the
// operation is appended to the tape and the result requires grad as well.
//
// Binary elementwise operations accept identical shapes, or one operand of
// size 1 which is broadcast. Shape violations raise StructuralError; domain
// violations (log of a non-positive value, division by zero) raise DomainError.
namespace mtlw::ad {

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor div(Tape& tape, const Tensor& a, const Tensor& b);

Tensor relu(Tape& tape, const Tensor& a);
Tensor exp(Tape& tape, const Tensor& a);
Tensor log(Tape& tape, const Tensor& a);
Tensor abs(Tape& tape, const Tensor& a);
Tensor square(Tape& tape, const Tensor& a);
Tensor negate(Tape& tape, const Tensor& a);
Tensor scale(Tape& tape, const Tensor& a, double factor);
Tensor sigmoid(Tape& tape, const Tensor& a);

// max(a, floor); the gradient is zero wherever the floor is active.
Tensor clamp_min(Tape& tape, const Tensor& a, double floor);

// a[m x k] * b[k x n]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

// Adds bias[j] along `axis`, where bias has length x.dim(axis).
Tensor bias_add(Tape& tape, const Tensor& x, const Tensor& bias, std::size_t axis);

// Cross-correlation. input is [C_in x H x W] or [B x C_in x H x W];
// kernels are [C_out x C_in x kh x kw].
Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernels, std::size_t stride, std::size_t padding);

// Max over window x window patches; output size rounds down. Ties route the
// gradient to the first element in row-major window order.
Tensor maxpool2d(Tape& tape, const Tensor& input, std::size_t window, std::size_t stride);

// [C x H x W] -> [C], [B x C x H x W] -> [B x C]
Tensor global_avg_pool(Tape& tape, const Tensor& input);

Tensor mean(Tape& tape, const Tensor& a);
Tensor sum(Tape& tape, const Tensor& a);

// Mean over the batch of -log softmax(logits[b])[labels[b]]; logits are [B x C].
Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, std::span<const int> labels);

}  // namespace mtlw::ad
