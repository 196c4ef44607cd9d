#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace attnbn::testing {

std::vector<double> loop_conv2d(const std::vector<double>& x, std::size_t h, std::size_t w, std::size_t cin,
                                const std::vector<double>& kernel, std::size_t k, std::size_t cout,
                                const std::vector<double>& bias, std::size_t dilation, std::size_t stride) {
  const std::size_t oh = (h + stride - 1) / stride;
  const std::size_t ow = (w + stride - 1) / stride;
  const long span = static_cast<long>((k - 1) * dilation + 1);
  const long pad_h = std::max(0L, (static_cast<long>((oh - 1) * stride) + span - static_cast<long>(h)) / 2);
  const long pad_w = std::max(0L, (static_cast<long>((ow - 1) * stride) + span - static_cast<long>(w)) / 2);
  std::vector<double> y(oh * ow * cout, 0.0);
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      for (std::size_t co = 0; co < cout; ++co) {
        double acc = bias.empty() ? 0.0 : bias[co];
        for (std::size_t ky = 0; ky < k; ++ky) {
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long iy = static_cast<long>(oy * stride + ky * dilation) - pad_h;
            const long ix = static_cast<long>(ox * stride + kx * dilation) - pad_w;
            if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              acc += x[(iy * w + ix) * cin + ci] * kernel[((ky * k + kx) * cin + ci) * cout + co];
            }
          }
        }
        y[(oy * ow + ox) * cout + co] = acc;
      }
    }
  }
  return y;
}

std::vector<double> loop_softmax(const std::vector<double>& logits) {
  double peak = logits[0];
  for (double v : logits) peak = std::max(peak, v);
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> loop_mean_pool(const std::vector<double>& x, std::size_t cells, std::size_t c) {
  std::vector<double> out(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < cells; ++i) out[k] += x[i * c + k];
    out[k] /= static_cast<double>(cells);
  }
  return out;
}

namespace {

std::vector<double> dense(const LoopDense& l, const std::vector<double>& in, bool relu) {
  std::vector<double> out(l.out);
  for (std::size_t o = 0; o < l.out; ++o) {
    double acc = l.bias[o];
    for (std::size_t i = 0; i < l.in; ++i) acc += in[i] * l.weight[i * l.out + o];
    out[o] = relu ? std::max(acc, 0.0) : acc;
  }
  return out;
}

}  // namespace

std::vector<double> loop_bottleneck(const std::vector<double>& attended, std::size_t cells, std::size_t d,
                                    const std::vector<double>& basis, std::size_t basis_d,
                                    const LoopDense& l0, const LoopDense& l1, bool mean) {
  std::vector<double> z(l1.out, 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    std::vector<double> in;
    for (std::size_t k = 0; k < d; ++k) in.push_back(attended[i * d + k]);
    for (std::size_t k = 0; k < basis_d; ++k) in.push_back(basis[i * basis_d + k]);
    const auto out = dense(l1, dense(l0, in, true), false);
    for (std::size_t k = 0; k < l1.out; ++k) z[k] += out[k];
  }
  if (mean) {
    for (double& v : z) v /= static_cast<double>(cells);
  }
  return z;
}

std::vector<double> loop_scale_cells(const std::vector<double>& f, const std::vector<double>& alpha,
                                     std::size_t c) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    for (std::size_t k = 0; k < c; ++k) out[i * c + k] = alpha[i] * f[i * c + k];
  }
  return out;
}

double loop_ade(const std::vector<scene::Vec2>& a, const std::vector<scene::Vec2>& b) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double dx = a[k].x - b[k].x;
    const double dy = a[k].y - b[k].y;
    total += std::sqrt(dx * dx + dy * dy);
  }
  return total / static_cast<double>(a.size());
}

double loop_fde(const std::vector<scene::Vec2>& a, const std::vector<scene::Vec2>& b) {
  const double dx = a.back().x - b.back().x;
  const double dy = a.back().y - b.back().y;
  return std::sqrt(dx * dx + dy * dy);
}

double loop_collision(const std::vector<std::vector<double>>& b, const std::vector<std::vector<double>>& o) {
  double total = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    for (std::size_t i = 0; i < b[k].size(); ++i) total += b[k][i] * o[k][i];
  }
  return total / static_cast<double>(b.size());
}

double loop_entropy(const std::vector<double>& alpha) {
  double h = 0.0;
  for (double a : alpha) {
    if (a > 0.0) h -= a * std::log(a);
  }
  return h;
}

double loop_mass_in_region(const std::vector<double>& alpha, const scene::GridConfig& grid,
                           const std::vector<scene::OrientedBox>& boxes, double dilation_m) {
  const int res = grid.resolution;
  const double mpp = grid.field_of_view_m / res;
  double mass = 0.0;
  for (int row = 0; row < res; ++row) {
    for (int col = 0; col < res; ++col) {
      // Pixel center in agent meters: x right of the anchor column, y up from the anchor row.
      const double mx = (col + 0.5 - 0.5 * res) * mpp;
      const double my = (0.75 * res - (row + 0.5)) * mpp;
      bool hit = false;
      for (const auto& b : boxes) {
        const double c = std::cos(b.pose.heading), s = std::sin(b.pose.heading);
        const double dx = mx - b.pose.position.x, dy = my - b.pose.position.y;
        const double along = std::abs(c * dx + s * dy) - 0.5 * b.length;
        const double across = std::abs(-s * dx + c * dy) - 0.5 * b.width;
        const double ox = std::max(along, 0.0), oy = std::max(across, 0.0);
        if (std::sqrt(ox * ox + oy * oy) <= dilation_m) hit = true;
      }
      if (hit) mass += alpha[static_cast<std::size_t>(row * res + col)];
    }
  }
  return mass;
}

}  // namespace attnbn::testing
