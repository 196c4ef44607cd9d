#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace attnbn::eval {

/// One bilinear expansion of a row-major map by an integer factor (pixel-center
/// aligned, edges clamped).
std::vector<double> bilinear_expand(std::span<const double> map, std::size_t rows, std::size_t cols,
                                    std::size_t factor);

/// Expands a rows x cols map to target_rows x target_cols by repeated 2x bilinear
/// steps (any leftover odd factor is applied in one final step), then rescales
/// so the total mass equals the input's. Targets must be integer multiples.
std::vector<double> upsample_pyramid(std::span<const double> map, std::size_t rows, std::size_t cols,
                                     std::size_t target_rows, std::size_t target_cols);

}  // namespace attnbn::eval
