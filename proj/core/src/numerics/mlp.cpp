#include "attnbn/numerics/mlp.hpp"

#include "attnbn/error.hpp"
#include "attnbn/numerics/ops.hpp"

namespace attnbn::num {

Tensor mlp(std::span<const DenseLayer> layers, const Tensor& x, bool activate_output) {
  if (layers.empty()) throw_invalid("mlp: no layers");
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    if (layers[i].weight.dim(1) != layers[i + 1].weight.dim(0)) {
      throw_invalid("mlp: layer " + std::to_string(i) + " width " +
                    std::to_string(layers[i].weight.dim(1)) + " does not chain into " +
                    to_string(layers[i + 1].weight.shape()));
    }
  }
  Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = linear(h, layers[i].weight, layers[i].bias);
    if (i + 1 < layers.size() || activate_output) h = relu(h);
  }
  return h;
}

}  // namespace attnbn::num
