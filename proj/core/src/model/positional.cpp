#include "attnbn/model/positional.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "attnbn/error.hpp"

namespace attnbn::model {

num::Tensor positional_basis(std::size_t rows, std::size_t cols, std::size_t depth) {
  if (depth == 0 || depth % 4 != 0) throw_invalid("positional_basis: depth must be a positive multiple of 4");
  if (rows == 0 || cols == 0) throw_invalid("positional_basis: empty grid");

  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, std::size_t, std::size_t>, num::Tensor> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(rows, cols, depth);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const std::size_t n = depth / 4;
  std::vector<double> values(rows * cols * depth);
  for (std::size_t y = 0; y < rows; ++y) {
    for (std::size_t x = 0; x < cols; ++x) {
      double* v = values.data() + (y * cols + x) * depth;
      for (std::size_t i = 0; i < n; ++i) {
        const double f = std::pow(1000.0, 4.0 * static_cast<double>(i) / static_cast<double>(depth));
        v[i] = std::sin(static_cast<double>(x) / f);
        v[n + i] = std::cos(static_cast<double>(x) / f);
        v[2 * n + i] = std::sin(static_cast<double>(y) / f);
        v[3 * n + i] = std::cos(static_cast<double>(y) / f);
      }
    }
  }
  auto basis = num::Tensor::constant({rows, cols, depth}, std::move(values));
  cache.emplace(key, basis);
  return basis;
}

}  // namespace attnbn::model
