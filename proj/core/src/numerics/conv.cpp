// Dense kernels backed by Eigen GEMM: matmul, linear and im2col convolution.

#include <Eigen/Core>
#include <algorithm>
#include <span>

#include "attnbn/numerics/ops.hpp"
#include "op_support.hpp"

namespace attnbn::num {

using detail::make_result;
using detail::Node;
using detail::parent_grad;
using detail::require_rank;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;

ConstMap cmap(const double* data, std::size_t rows, std::size_t cols) {
  return ConstMap(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

// Eigen picks its vector peeling from pointer alignment, and std::vector only
// guarantees 16 bytes, so results could depend on where the heap put a buffer.
// Every operand is therefore copied into Eigen-owned (maximally aligned) storage.
RowMatrix aligned(const double* data, std::size_t rows, std::size_t cols) { return cmap(data, rows, cols); }

void add_into(double* dst, const RowMatrix& m) {
  const double* src = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) dst[i] += src[i];
}

std::vector<double> to_vector(const RowMatrix& m) { return {m.data(), m.data() + m.size()}; }

void add_bias(RowMatrix& y, std::span<const double> bias) {
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    for (Eigen::Index c = 0; c < y.cols(); ++c) y(r, c) += bias[static_cast<std::size_t>(c)];
  }
}

// Column sums in a fixed order.
void add_column_sums(double* dst, const double* dy, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) dst[c] += dy[r * cols + c];
  }
}

struct ConvGeometry {
  std::size_t in_h, in_w, in_c;
  std::size_t kh, kw, out_c;
  std::size_t out_h, out_w;
  std::size_t pad_top, pad_left;
  std::size_t dilation, stride;

  std::size_t patch() const { return kh * kw * in_c; }
  std::size_t out_cells() const { return out_h * out_w; }
  bool is_pointwise() const { return kh == 1 && kw == 1 && stride == 1; }
};

std::size_t same_padding_before(std::size_t in, std::size_t out, std::size_t k,
                                std::size_t dilation, std::size_t stride) {
  const std::size_t effective = (k - 1) * dilation + 1;
  const std::size_t needed = (out - 1) * stride + effective;
  return needed > in ? (needed - in) / 2 : 0;
}

// col[(oy * out_w + ox), (ky * kw + kx) * in_c + ci] = x[iy, ix, ci], zero outside.
void im2col(const ConvGeometry& g, const double* x, double* col) {
  const std::size_t patch = g.patch();
  for (std::size_t oy = 0; oy < g.out_h; ++oy) {
    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
      double* row = col + (oy * g.out_w + ox) * patch;
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const long iy = static_cast<long>(oy * g.stride + ky * g.dilation) -
                        static_cast<long>(g.pad_top);
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const long ix = static_cast<long>(ox * g.stride + kx * g.dilation) -
                          static_cast<long>(g.pad_left);
          double* dst = row + (ky * g.kw + kx) * g.in_c;
          if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.in_h) ||
              ix >= static_cast<long>(g.in_w)) {
            std::fill_n(dst, g.in_c, 0.0);
          } else {
            std::copy_n(x + (iy * g.in_w + ix) * g.in_c, g.in_c, dst);
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& g, const double* col, double* dx) {
  const std::size_t patch = g.patch();
  for (std::size_t oy = 0; oy < g.out_h; ++oy) {
    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
      const double* row = col + (oy * g.out_w + ox) * patch;
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const long iy = static_cast<long>(oy * g.stride + ky * g.dilation) -
                        static_cast<long>(g.pad_top);
        if (iy < 0 || iy >= static_cast<long>(g.in_h)) continue;
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const long ix = static_cast<long>(ox * g.stride + kx * g.dilation) -
                          static_cast<long>(g.pad_left);
          if (ix < 0 || ix >= static_cast<long>(g.in_w)) continue;
          const double* src = row + (ky * g.kw + kx) * g.in_c;
          double* dst = dx + (iy * g.in_w + ix) * g.in_c;
          for (std::size_t c = 0; c < g.in_c; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw_invalid("matmul: inner dimension mismatch " + to_string(a.shape()) + " x " +
                  to_string(b.shape()));
  }
  RowMatrix y = aligned(a.values().data(), m, k) * aligned(b.values().data(), k, n);
  return make_result({m, n}, to_vector(y), {a, b}, [m, k, n](Node& self) {
    const RowMatrix dy = aligned(self.grad.data(), m, n);
    if (double* ga = parent_grad(self, 0)) {
      const RowMatrix bt = aligned(self.parents[1]->value.data(), k, n).transpose();
      add_into(ga, RowMatrix(dy * bt));
    }
    if (double* gb = parent_grad(self, 1)) {
      const RowMatrix at = aligned(self.parents[0]->value.data(), m, k).transpose();
      add_into(gb, RowMatrix(at * dy));
    }
  }, "matmul");
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(weight, 2, "linear");
  if (x.rank() == 0) throw_invalid("linear: scalar input");
  const std::size_t in = weight.dim(0), out_dim = weight.dim(1);
  if (x.shape().back() != in) {
    throw_invalid("linear: input width " + std::to_string(x.shape().back()) +
                  " does not match weight " + to_string(weight.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{out_dim}) {
    throw_invalid("linear: bias must be [" + std::to_string(out_dim) + "]");
  }
  const std::size_t rows = x.size() / in;
  Shape out_shape = x.shape();
  out_shape.back() = out_dim;
  RowMatrix y = aligned(x.values().data(), rows, in) * aligned(weight.values().data(), in, out_dim);
  if (has_bias) add_bias(y, bias.values());
  std::vector<Tensor> parents{x, weight};
  if (has_bias) parents.push_back(bias);
  return make_result(std::move(out_shape), to_vector(y), std::move(parents),
                     [rows, in, out_dim, has_bias](Node& self) {
    const RowMatrix dy = aligned(self.grad.data(), rows, out_dim);
    if (double* gx = parent_grad(self, 0)) {
      const RowMatrix wt = aligned(self.parents[1]->value.data(), in, out_dim).transpose();
      add_into(gx, RowMatrix(dy * wt));
    }
    if (double* gw = parent_grad(self, 1)) {
      const RowMatrix xt = aligned(self.parents[0]->value.data(), rows, in).transpose();
      add_into(gw, RowMatrix(xt * dy));
    }
    if (has_bias) {
      if (double* gb = parent_grad(self, 2)) add_column_sums(gb, self.grad.data(), rows, out_dim);
    }
  }, "linear");
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, Conv2dOptions options) {
  require_rank(input, 3, "conv2d");
  require_rank(kernel, 4, "conv2d");
  if (options.dilation < 1 || options.stride < 1) {
    throw_invalid("conv2d: dilation and stride must be >= 1");
  }
  ConvGeometry g{};
  g.in_h = input.dim(0);
  g.in_w = input.dim(1);
  g.in_c = input.dim(2);
  g.kh = kernel.dim(0);
  g.kw = kernel.dim(1);
  g.out_c = kernel.dim(3);
  if (kernel.dim(2) != g.in_c) {
    throw_invalid("conv2d: input has " + std::to_string(g.in_c) + " channels, kernel expects " +
                  std::to_string(kernel.dim(2)));
  }
  if (g.kh % 2 == 0 || g.kw % 2 == 0) throw_invalid("conv2d: kernel extents must be odd");
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{g.out_c}) {
    throw_invalid("conv2d: bias must be [" + std::to_string(g.out_c) + "]");
  }
  g.dilation = options.dilation;
  g.stride = options.stride;
  g.out_h = (g.in_h + g.stride - 1) / g.stride;
  g.out_w = (g.in_w + g.stride - 1) / g.stride;
  g.pad_top = same_padding_before(g.in_h, g.out_h, g.kh, g.dilation, g.stride);
  g.pad_left = same_padding_before(g.in_w, g.out_w, g.kw, g.dilation, g.stride);

  const std::size_t rows = g.out_cells();
  const std::size_t patch = g.patch();
  RowMatrix col(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(patch));
  if (g.is_pointwise()) {
    col = cmap(input.values().data(), rows, patch);
  } else {
    im2col(g, input.values().data(), col.data());
  }
  RowMatrix y = col * aligned(kernel.values().data(), patch, g.out_c);
  if (has_bias) add_bias(y, bias.values());

  std::vector<Tensor> parents{input, kernel};
  if (has_bias) parents.push_back(bias);
  return make_result({g.out_h, g.out_w, g.out_c}, to_vector(y), std::move(parents),
                     [g, has_bias, col = std::move(col)](Node& self) {
    const std::size_t rows = g.out_cells();
    const std::size_t patch = g.patch();
    const RowMatrix dy = aligned(self.grad.data(), rows, g.out_c);
    if (double* gk = parent_grad(self, 1)) {
      const RowMatrix colt = col.transpose();
      add_into(gk, RowMatrix(colt * dy));
    }
    if (has_bias) {
      if (double* gb = parent_grad(self, 2)) add_column_sums(gb, self.grad.data(), rows, g.out_c);
    }
    if (double* gx = parent_grad(self, 0)) {
      const RowMatrix kt = aligned(self.parents[1]->value.data(), patch, g.out_c).transpose();
      const RowMatrix dcol = dy * kt;
      if (g.is_pointwise()) {
        add_into(gx, dcol);
      } else {
        col2im_add(g, dcol.data(), gx);
      }
    }
  }, "conv2d");
}

}  // namespace attnbn::num
