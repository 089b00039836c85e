#pragma once

#include "mtlw/autodiff/tape.hpp"

namespace mtlw::ad::detail {

// Fills node.output values (and node.saved_index) from node.inputs.
void forward(Node& node);

// Accumulates node.output's gradient into every input that requires grad.
void backward(Node& node);

}  // namespace mtlw::ad::detail
