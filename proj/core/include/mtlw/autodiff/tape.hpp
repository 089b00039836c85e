#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mtlw/autodiff/tensor.hpp"

namespace mtlw::ad {

enum class OpKind : std::uint8_t {
  kAdd,
  kSub,
  kMul,
  kDiv,
  kRelu,
  kExp,
  kLog,
  kAbs,
  kSquare,
  kNegate,
  kScale,
  kClampMin,
  kSigmoid,
  kMatMul,
  kBiasAdd,
  kConv2d,
  kMaxPool2d,
  kGlobalAvgPool,
  kMean,
  kSum,
  kSoftmaxCrossEntropy,
};

std::string_view op_name(OpKind kind);

struct OpAttrs {
  double scalar = 0.0;  // scale factor, clamp floor
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t window = 0;
  std::size_t axis = 0;
  std::vector<int> labels;  // softmax cross-entropy targets
};

struct Node {
  OpKind kind;
  std::vector<Tensor> inputs;
  Tensor output;
  OpAttrs attrs;
  std::vector<std::size_t> saved_index;  // maxpool argmax positions
};

/// Ordered record of operations for one reverse-mode sweep.
///
/// Operands always precede the nodes consuming them because nodes are
/// appended as operations execute. A tape built with recording disabled
/// computes values only and never stores nodes; evaluation uses that mode.
class Tape {
 public:
  Tape() = default;
  explicit Tape(bool recording) : recording_(recording) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  bool recording() const noexcept { return recording_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  void push(Node node) { nodes_.push_back(std::move(node)); }
  void clear() { nodes_.clear(); }

  /// Seeds d(loss)/d(loss) = 1 and sweeps the nodes in reverse, accumulating
  /// into every operand that requires grad. Leaf gradients accumulate across
  /// calls until zeroed; intermediate gradients are reset on entry.
  void backward(const Tensor& loss);

  /// Re-executes every node from its recorded operands and compares the
  /// result bitwise with the stored output. Returns the index of the first
  /// mismatching node, or size() when the whole tape reproduces.
  std::size_t replay() const;

 private:
  std::vector<Node> nodes_;
  bool recording_ = true;
};

}  // namespace mtlw::ad
