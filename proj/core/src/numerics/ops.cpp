#include "attnbn/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

#include "op_support.hpp"

namespace attnbn::num {

using detail::make_result;
using detail::Node;
using detail::parent_grad;
using detail::require_rank;
using detail::require_same_shape;

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (double* g = parent_grad(self, p)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
      }
    }
  }, "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
    if (double* g = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
    }
  }, "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& x = self.parents[0]->value;
    const auto& y = self.parents[1]->value;
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * y[i];
    }
    if (double* g = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * x[i];
    }
  }, "mul");
}

Tensor maximum(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "maximum");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(av[i], bv[i]);
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& x = self.parents[0]->value;
    const auto& y = self.parents[1]->value;
    double* ga = parent_grad(self, 0);
    double* gb = parent_grad(self, 1);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      // Ties route the gradient to the first operand.
      if (x[i] >= y[i]) {
        if (ga) ga[i] += self.grad[i];
      } else if (gb) {
        gb[i] += self.grad[i];
      }
    }
  }, "maximum");
}

Tensor scale(const Tensor& a, double factor) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
  return make_result(a.shape(), std::move(out), {a}, [factor](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * factor;
    }
  }, "scale");
}

Tensor add_scalar(const Tensor& a, double offset) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + offset;
  return make_result(a.shape(), std::move(out), {a}, [](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
  }, "add_scalar");
}

Tensor relu(const Tensor& a) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
  return make_result(a.shape(), std::move(out), {a}, [](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      const auto& x = self.parents[0]->value;
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        if (x[i] > 0.0) g[i] += self.grad[i];
      }
    }
  }, "relu");
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor sigmoid(const Tensor& a) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(av[i]);
  return make_result(a.shape(), std::move(out), {a}, [](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        const double s = self.value[i];
        g[i] += self.grad[i] * s * (1.0 - s);
      }
    }
  }, "sigmoid");
}

Tensor cos(const Tensor& a) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::cos(av[i]);
  return make_result(a.shape(), std::move(out), {a}, [](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      const auto& x = self.parents[0]->value;
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i] * std::sin(x[i]);
    }
  }, "cos");
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  return make_result({1}, {total}, {a}, [](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      const double up = self.grad[0];
      for (std::size_t i = 0; i < self.parents[0]->value.size(); ++i) g[i] += up;
    }
  }, "sum");
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw_invalid("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.size()) {
    throw_invalid("reshape: " + to_string(a.shape()) + " -> " + to_string(shape));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  return make_result(std::move(shape), std::move(out), {a}, [](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
  }, "reshape");
}

Tensor select(const Tensor& a, std::size_t index) {
  if (index >= a.size()) throw_invalid("select: index out of range");
  return make_result({1}, {a.values()[index]}, {a}, [index](Node& self) {
    if (double* g = parent_grad(self, 0)) g[index] += self.grad[0];
  }, "select");
}

Tensor concat_channels(std::span<const Tensor> maps) {
  if (maps.empty()) throw_invalid("concat_channels: no inputs");
  for (const auto& m : maps) require_rank(m, 3, "concat_channels");
  const std::size_t rows = maps[0].dim(0);
  const std::size_t cols = maps[0].dim(1);
  std::vector<std::size_t> depths;
  std::size_t total = 0;
  for (const auto& m : maps) {
    if (m.dim(0) != rows || m.dim(1) != cols) {
      throw_invalid("concat_channels: spatial mismatch " + to_string(m.shape()) + " vs " +
                    to_string(maps[0].shape()));
    }
    depths.push_back(m.dim(2));
    total += m.dim(2);
  }
  const std::size_t cells = rows * cols;
  std::vector<double> out(cells * total);
  std::size_t offset = 0;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    const auto src = maps[m].values();
    const std::size_t c = depths[m];
    for (std::size_t i = 0; i < cells; ++i) {
      std::copy_n(src.data() + i * c, c, out.data() + i * total + offset);
    }
    offset += c;
  }
  std::vector<Tensor> parents(maps.begin(), maps.end());
  return make_result({rows, cols, total}, std::move(out), std::move(parents),
                     [depths, cells, total](Node& self) {
    std::size_t offset = 0;
    for (std::size_t m = 0; m < depths.size(); ++m) {
      const std::size_t c = depths[m];
      if (double* g = parent_grad(self, m)) {
        for (std::size_t i = 0; i < cells; ++i) {
          for (std::size_t k = 0; k < c; ++k) g[i * c + k] += self.grad[i * total + offset + k];
        }
      }
      offset += c;
    }
  }, "concat_channels");
}

Tensor broadcast_cells(const Tensor& vec, std::size_t rows, std::size_t cols) {
  require_rank(vec, 1, "broadcast_cells");
  const std::size_t c = vec.dim(0);
  const std::size_t cells = rows * cols;
  const auto v = vec.values();
  std::vector<double> out(cells * c);
  for (std::size_t i = 0; i < cells; ++i) std::copy(v.begin(), v.end(), out.begin() + i * c);
  return make_result({rows, cols, c}, std::move(out), {vec}, [c, cells](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t k = 0; k < c; ++k) g[k] += self.grad[i * c + k];
      }
    }
  }, "broadcast_cells");
}

Tensor channel_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_rank(x, 3, "channel_norm");
  const std::size_t c = x.dim(2);
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c}) {
    throw_invalid("channel_norm: scale/shift must be [" + std::to_string(c) + "]");
  }
  const std::size_t cells = x.dim(0) * x.dim(1);
  const auto xv = x.values();
  const auto gv = gamma.values();
  const auto bv = beta.values();
  std::vector<double> mu(c, 0.0), inv_std(c, 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t k = 0; k < c; ++k) mu[k] += xv[i * c + k];
  }
  for (auto& m : mu) m /= static_cast<double>(cells);
  std::vector<double> var(c, 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t k = 0; k < c; ++k) {
      const double d = xv[i * c + k] - mu[k];
      var[k] += d * d;
    }
  }
  for (std::size_t k = 0; k < c; ++k) inv_std[k] = 1.0 / std::sqrt(var[k] / cells + eps);
  std::vector<double> xhat(xv.size());
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t k = 0; k < c; ++k) {
      const double h = (xv[i * c + k] - mu[k]) * inv_std[k];
      xhat[i * c + k] = h;
      out[i * c + k] = gv[k] * h + bv[k];
    }
  }
  return make_result(x.shape(), std::move(out), {x, gamma, beta},
                     [c, cells, xhat = std::move(xhat), inv_std](Node& self) {
    const auto& gam = self.parents[1]->value;
    const auto& dy = self.grad;
    if (double* gg = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t k = 0; k < c; ++k) gg[k] += dy[i * c + k] * xhat[i * c + k];
      }
    }
    if (double* gb = parent_grad(self, 2)) {
      for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t k = 0; k < c; ++k) gb[k] += dy[i * c + k];
      }
    }
    if (double* gx = parent_grad(self, 0)) {
      std::vector<double> sum_d(c, 0.0), sum_dx(c, 0.0);
      for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t k = 0; k < c; ++k) {
          const double d = dy[i * c + k] * gam[k];
          sum_d[k] += d;
          sum_dx[k] += d * xhat[i * c + k];
        }
      }
      const double n = static_cast<double>(cells);
      for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t k = 0; k < c; ++k) {
          const double d = dy[i * c + k] * gam[k];
          gx[i * c + k] += inv_std[k] / n * (n * d - sum_d[k] - xhat[i * c + k] * sum_dx[k]);
        }
      }
    }
  }, "channel_norm");
}

Tensor spatial_softmax(const Tensor& logits) {
  const auto& s = logits.shape();
  const bool ok = s.size() == 2 || (s.size() == 3 && s[2] == 1);
  if (!ok) throw_invalid("spatial_softmax: expected [H,W] or [H,W,1], got " + to_string(s));
  const auto lv = logits.values();
  if (lv.empty()) throw_invalid("spatial_softmax: empty map");
  const double peak = *std::max_element(lv.begin(), lv.end());
  std::vector<double> out(lv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    out[i] = std::exp(lv[i] - peak);
    total += out[i];
  }
  for (auto& o : out) o /= total;
  return make_result({s[0], s[1]}, std::move(out), {logits}, [](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      double dot = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) dot += self.grad[i] * self.value[i];
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        g[i] += self.value[i] * (self.grad[i] - dot);
      }
    }
  }, "spatial_softmax");
}

Tensor scale_cells(const Tensor& features, const Tensor& weights) {
  require_rank(features, 3, "scale_cells");
  require_rank(weights, 2, "scale_cells");
  if (weights.dim(0) != features.dim(0) || weights.dim(1) != features.dim(1)) {
    throw_invalid("scale_cells: weights " + to_string(weights.shape()) + " vs features " +
                  to_string(features.shape()));
  }
  const std::size_t c = features.dim(2);
  const std::size_t cells = weights.size();
  const auto fv = features.values();
  const auto wv = weights.values();
  std::vector<double> out(fv.size());
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t k = 0; k < c; ++k) out[i * c + k] = wv[i] * fv[i * c + k];
  }
  return make_result(features.shape(), std::move(out), {features, weights},
                     [c, cells](Node& self) {
    const auto& f = self.parents[0]->value;
    const auto& w = self.parents[1]->value;
    if (double* gf = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t k = 0; k < c; ++k) gf[i * c + k] += w[i] * self.grad[i * c + k];
      }
    }
    if (double* gw = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < cells; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < c; ++k) acc += f[i * c + k] * self.grad[i * c + k];
        gw[i] += acc;
      }
    }
  }, "scale_cells");
}

namespace {

Tensor pool_spatial(const Tensor& x, bool average, const char* name) {
  require_rank(x, 3, name);
  const std::size_t cells = x.dim(0) * x.dim(1);
  if (cells == 0) throw_invalid(std::string(name) + ": empty spatial extent");
  const std::size_t c = x.dim(2);
  const double factor = average ? 1.0 / static_cast<double>(cells) : 1.0;
  const auto xv = x.values();
  std::vector<double> out(c, 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t k = 0; k < c; ++k) out[k] += xv[i * c + k];
  }
  for (auto& o : out) o *= factor;
  return make_result({c}, std::move(out), {x}, [c, cells, factor](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t k = 0; k < c; ++k) g[i * c + k] += self.grad[k] * factor;
      }
    }
  }, name);
}

}  // namespace

Tensor mean_pool_spatial(const Tensor& x) { return pool_spatial(x, true, "mean_pool_spatial"); }

Tensor sum_pool_spatial(const Tensor& x) { return pool_spatial(x, false, "sum_pool_spatial"); }

Tensor slice_channel(const Tensor& x, std::size_t channel) {
  require_rank(x, 3, "slice_channel");
  const std::size_t c = x.dim(2);
  if (channel >= c) throw_invalid("slice_channel: channel out of range");
  const std::size_t cells = x.dim(0) * x.dim(1);
  const auto xv = x.values();
  std::vector<double> out(cells);
  for (std::size_t i = 0; i < cells; ++i) out[i] = xv[i * c + channel];
  return make_result({x.dim(0), x.dim(1)}, std::move(out), {x}, [c, cells, channel](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < cells; ++i) g[i * c + channel] += self.grad[i];
    }
  }, "slice_channel");
}

Tensor bilinear_splat(const Tensor& point, std::size_t rows, std::size_t cols) {
  if (point.size() != 2) throw_invalid("bilinear_splat: point must have 2 elements");
  const double fx = point[0] - 0.5;
  const double fy = point[1] - 0.5;
  const double jx = std::floor(fx);
  const double iy = std::floor(fy);
  const double tx = fx - jx;
  const double ty = fy - iy;
  const long j0 = static_cast<long>(jx);
  const long i0 = static_cast<long>(iy);
  std::vector<double> out(rows * cols, 0.0);
  struct Tap {
    long i, j;
    double w, dw_du, dw_dv;
  };
  const Tap taps[4] = {
      {i0, j0, (1 - tx) * (1 - ty), -(1 - ty), -(1 - tx)},
      {i0, j0 + 1, tx * (1 - ty), (1 - ty), -tx},
      {i0 + 1, j0, (1 - tx) * ty, -ty, (1 - tx)},
      {i0 + 1, j0 + 1, tx * ty, ty, tx},
  };
  auto inside = [&](const Tap& t) {
    return t.i >= 0 && t.j >= 0 && t.i < static_cast<long>(rows) && t.j < static_cast<long>(cols);
  };
  for (const auto& t : taps) {
    if (inside(t)) out[t.i * cols + t.j] += t.w;
  }
  std::vector<Tap> live;
  for (const auto& t : taps) {
    if (inside(t)) live.push_back(t);
  }
  return make_result({rows, cols}, std::move(out), {point}, [live, cols](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (const auto& t : live) {
        const double up = self.grad[t.i * cols + t.j];
        g[0] += up * t.dw_du;
        g[1] += up * t.dw_dv;
      }
    }
  }, "bilinear_splat");
}

Tensor bce_with_logits(const Tensor& logits, std::span<const double> targets) {
  if (logits.size() != targets.size()) throw_invalid("bce_with_logits: target size mismatch");
  if (targets.empty()) throw_invalid("bce_with_logits: empty input");
  const auto x = logits.values();
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += std::max(x[i], 0.0) - x[i] * targets[i] + std::log1p(std::exp(-std::abs(x[i])));
  }
  const double n = static_cast<double>(x.size());
  std::vector<double> t(targets.begin(), targets.end());
  return make_result({1}, {total / n}, {logits}, [t = std::move(t), n](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      const auto& x = self.parents[0]->value;
      const double up = self.grad[0] / n;
      for (std::size_t i = 0; i < x.size(); ++i) g[i] += up * (stable_sigmoid(x[i]) - t[i]);
    }
  }, "bce_with_logits");
}

}  // namespace attnbn::num
