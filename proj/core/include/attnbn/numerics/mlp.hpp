#pragma once

#include <span>

#include "attnbn/numerics/tensor.hpp"

namespace attnbn::num {

struct DenseLayer {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out]
};

/// Affine layers joined by ReLU, applied over the last axis of `x`.
/// With `activate_output` the final layer is followed by ReLU as well.
Tensor mlp(std::span<const DenseLayer> layers, const Tensor& x, bool activate_output = false);

}  // namespace attnbn::num
