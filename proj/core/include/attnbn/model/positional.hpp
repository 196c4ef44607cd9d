#pragma once

#include <cstddef>

#include "attnbn/numerics/tensor.hpp"

namespace attnbn::model {

/// Fourier features per cell of a rows x cols grid, shape [rows, cols, depth].
/// With x = column and y = row in cell units, wavelengths f_u = 1000^u for
/// u = 4i/depth (i = 0 .. depth/4 - 1), channels are laid out in four blocks:
/// sin(x/f_u), cos(x/f_u), sin(y/f_u), cos(y/f_u). Cached per (rows, cols, depth).
num::Tensor positional_basis(std::size_t rows, std::size_t cols, std::size_t depth);

}  // namespace attnbn::model
