#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "attnbn/numerics/random.hpp"
#include "attnbn/numerics/tensor.hpp"

namespace attnbn::num {

/// Ordered, named collection of trainable leaves. Indices are stable, so
/// model code can hold an index and read the current tensor each pass.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return tensors_.size(); }
  const Tensor& operator[](std::size_t i) const { return tensors_.at(i); }
  const Tensor& at(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  const std::string& name(std::size_t i) const { return names_.at(i); }

  /// Swaps in a new leaf with the same shape.
  void replace(std::size_t i, Tensor value);
  void zero_grad() const;
  std::size_t total_elements() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// Same names, shapes and bit patterns.
bool bitwise_equal(const ParameterSet& a, const ParameterSet& b);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)), rounded to float precision so
/// the values survive 32-bit checkpoint storage unchanged.
std::vector<double> glorot_uniform(std::size_t count, std::size_t fan_in, std::size_t fan_out, Rng& rng);

double round_to_f32(double v);

}  // namespace attnbn::num
