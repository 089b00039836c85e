#include "mtlw/autodiff/tape.hpp"

#include <cstring>

#include "kernels.hpp"
#include "mtlw/errors.hpp"

namespace mtlw::ad {

void Tape::backward(const Tensor& loss) {
  if (!loss.is_scalar()) {
    throw StructuralError("backward: loss must be scalar, got shape " + shape_to_string(loss.shape()));
  }
  if (nodes_.empty()) throw StructuralError("backward: tape is empty");
  if (!loss.requires_grad()) throw StructuralError("backward: loss does not depend on any tensor requiring grad");

  for (Node& node : nodes_) node.output.clear_grad();
  Tensor root = loss;
  root.mutable_grad()[0] += 1.0;

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) detail::backward(*it);
}

std::size_t Tape::replay() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& recorded = nodes_[i];
    Node fresh{recorded.kind, recorded.inputs, Tensor::zeros(recorded.output.shape()), recorded.attrs, {}};
    detail::forward(fresh);
    const auto a = fresh.output.values();
    const auto b = recorded.output.values();
    if (a.size() != b.size() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0) return i;
  }
  return nodes_.size();
}

}  // namespace mtlw::ad
