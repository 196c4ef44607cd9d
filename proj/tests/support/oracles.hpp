#pragma once

// Brute-force reference implementations. Deliberately written as plain loops
// over explicit indices, sharing no code with the library kernels.

#include <cstddef>
#include <vector>

#include "attnbn/scene/geometry.hpp"
#include "attnbn/scene/scene.hpp"

namespace attnbn::testing {

/// TF-SAME cross-correlation on [h, w, cin] with a [k, k, cin, cout] kernel.
std::vector<double> loop_conv2d(const std::vector<double>& x, std::size_t h, std::size_t w, std::size_t cin,
                                const std::vector<double>& kernel, std::size_t k, std::size_t cout,
                                const std::vector<double>& bias, std::size_t dilation, std::size_t stride);

std::vector<double> loop_softmax(const std::vector<double>& logits);
std::vector<double> loop_mean_pool(const std::vector<double>& x, std::size_t cells, std::size_t c);

/// Per-cell two-layer ReLU MLP over [a_i; v_i], then the mean (or sum) over cells.
struct LoopDense {
  std::vector<double> weight;  // [in, out]
  std::vector<double> bias;
  std::size_t in = 0, out = 0;
};
std::vector<double> loop_bottleneck(const std::vector<double>& attended, std::size_t cells, std::size_t d,
                                    const std::vector<double>& basis, std::size_t basis_d,
                                    const LoopDense& l0, const LoopDense& l1, bool mean);

std::vector<double> loop_scale_cells(const std::vector<double>& f, const std::vector<double>& alpha,
                                     std::size_t c);

double loop_ade(const std::vector<scene::Vec2>& a, const std::vector<scene::Vec2>& b);
double loop_fde(const std::vector<scene::Vec2>& a, const std::vector<scene::Vec2>& b);
double loop_collision(const std::vector<std::vector<double>>& b, const std::vector<std::vector<double>>& o);
double loop_entropy(const std::vector<double>& alpha);

/// Sum of alpha over pixels whose centers are within `dilation_m` of any box.
double loop_mass_in_region(const std::vector<double>& alpha, const scene::GridConfig& grid,
                           const std::vector<scene::OrientedBox>& boxes, double dilation_m);

}  // namespace attnbn::testing
