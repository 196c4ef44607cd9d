#pragma once

#include <string>

#include "attnbn/error.hpp"
#include "attnbn/numerics/tensor.hpp"

namespace attnbn::num::detail {

/// Gradient buffer of parent i, or nullptr when that parent is not differentiable.
inline double* parent_grad(Node& self, std::size_t i) {
  auto& parent = *self.parents[i];
  if (!parent.requires_grad) return nullptr;
  return parent.grad_buffer().data();
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw_invalid(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                  to_string(b.shape()));
  }
}

inline void require_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.rank() != rank) {
    throw_invalid(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                  to_string(a.shape()));
  }
}

}  // namespace attnbn::num::detail
