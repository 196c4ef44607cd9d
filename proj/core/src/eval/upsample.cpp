#include "attnbn/eval/upsample.hpp"

#include <algorithm>
#include <cmath>

#include "attnbn/error.hpp"

namespace attnbn::eval {

std::vector<double> bilinear_expand(std::span<const double> map, std::size_t rows, std::size_t cols,
                                    std::size_t factor) {
  if (factor == 0) throw_invalid("bilinear_expand: factor must be positive");
  if (map.size() != rows * cols) throw_invalid("bilinear_expand: map size does not match extents");
  const std::size_t out_rows = rows * factor, out_cols = cols * factor;
  std::vector<double> out(out_rows * out_cols);
  const double f = static_cast<double>(factor);
  auto source = [f](std::size_t i, std::size_t n, std::size_t& lo, std::size_t& hi, double& t) {
    const double s = std::clamp((static_cast<double>(i) + 0.5) / f - 0.5, 0.0, static_cast<double>(n - 1));
    lo = static_cast<std::size_t>(std::floor(s));
    hi = std::min(lo + 1, n - 1);
    t = s - static_cast<double>(lo);
  };
  for (std::size_t r = 0; r < out_rows; ++r) {
    std::size_t r0, r1;
    double ty;
    source(r, rows, r0, r1, ty);
    for (std::size_t c = 0; c < out_cols; ++c) {
      std::size_t c0, c1;
      double tx;
      source(c, cols, c0, c1, tx);
      const double top = map[r0 * cols + c0] * (1 - tx) + map[r0 * cols + c1] * tx;
      const double bottom = map[r1 * cols + c0] * (1 - tx) + map[r1 * cols + c1] * tx;
      out[r * out_cols + c] = top * (1 - ty) + bottom * ty;
    }
  }
  return out;
}

std::vector<double> upsample_pyramid(std::span<const double> map, std::size_t rows, std::size_t cols,
                                     std::size_t target_rows, std::size_t target_cols) {
  if (rows == 0 || cols == 0 || map.size() != rows * cols) throw_invalid("upsample_pyramid: bad map extents");
  if (target_rows % rows != 0 || target_cols % cols != 0 || target_rows / rows != target_cols / cols) {
    throw_invalid("upsample_pyramid: target must be the same integer multiple in both axes");
  }
  std::size_t factor = target_rows / rows;
  double mass = 0.0;
  for (double v : map) mass += v;

  std::vector<double> current(map.begin(), map.end());
  std::size_t r = rows, c = cols;
  while (factor > 1) {
    const std::size_t step = factor % 2 == 0 ? 2 : factor;
    current = bilinear_expand(current, r, c, step);
    r *= step;
    c *= step;
    factor /= step;
  }
  double out_mass = 0.0;
  for (double v : current) out_mass += v;
  if (out_mass != 0.0) {
    const double s = mass / out_mass;
    for (double& v : current) v *= s;
  }
  return current;
}

}  // namespace attnbn::eval
