#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "attnbn/numerics/tensor.hpp"

namespace attnbn::num {

// Elementwise ops require identical shapes (no general broadcasting).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor cos(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);
/// Single element as a [1] tensor.
Tensor select(const Tensor& a, std::size_t index);

/// [m,k] x [k,n] -> [m,n].
Tensor matmul(const Tensor& a, const Tensor& b);

/// Affine map over the last axis: x[..., in] * w[in, out] + b[out].
/// `bias` may be undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct Conv2dOptions {
  std::size_t dilation = 1;
  std::size_t stride = 1;
};

/// Same-mode 2-D convolution (cross-correlation) over a [H, W, Cin] map with a
/// [kh, kw, Cin, Cout] kernel. Output extents are ceil(H / stride), ceil(W / stride);
/// padding is zero, split as TensorFlow's SAME (extra row/column at the end).
/// `bias` ([Cout]) may be undefined.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              Conv2dOptions options = {});

/// Depth concatenation of [H, W, Ci] maps.
Tensor concat_channels(std::span<const Tensor> maps);

/// Repeats a [C] vector at every cell of an H x W grid.
Tensor broadcast_cells(const Tensor& vec, std::size_t rows, std::size_t cols);

/// Per-channel normalization over the spatial cells with learned scale and shift.
Tensor channel_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// Softmax over all cells of a [H, W] or [H, W, 1] logit map; returns [H, W].
Tensor spatial_softmax(const Tensor& logits);

/// a_i = alpha_i * f_i for a [H, W, C] map and [H, W] weights.
Tensor scale_cells(const Tensor& features, const Tensor& weights);

/// [H, W, C] -> [C], arithmetic mean over cells.
Tensor mean_pool_spatial(const Tensor& x);
/// [H, W, C] -> [C], sum over cells.
Tensor sum_pool_spatial(const Tensor& x);

/// Channel c of a [H, W, C] map as [H, W].
Tensor slice_channel(const Tensor& x, std::size_t channel);

/// Bilinear splat of unit mass at continuous cell coordinates (u = column, v = row),
/// where cell (i, j) has its center at (j + 0.5, i + 0.5). `point` is [2] = (u, v).
/// Mass falling outside the grid is dropped.
Tensor bilinear_splat(const Tensor& point, std::size_t rows, std::size_t cols);

/// Mean binary cross-entropy between sigmoid(logits) and fixed targets in [0, 1].
Tensor bce_with_logits(const Tensor& logits, std::span<const double> targets);

}  // namespace attnbn::num
