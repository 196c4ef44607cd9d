#include "attnbn/numerics/parameters.hpp"

#include <cmath>
#include <cstring>

#include "attnbn/error.hpp"

namespace attnbn::num {

std::size_t ParameterSet::add(std::string name, Tensor value) {
  if (lookup_.count(name)) throw_invalid("duplicate parameter name " + name);
  if (!value.requires_grad() || !value.is_leaf()) {
    throw_invalid("parameter " + name + " must be a trainable leaf");
  }
  const std::size_t index = tensors_.size();
  lookup_.emplace(name, index);
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
  return index;
}

const Tensor& ParameterSet::at(std::string_view name) const {
  const auto idx = index_of(name);
  if (!idx) throw_invalid("unknown parameter " + std::string(name));
  return tensors_[*idx];
}

std::optional<std::size_t> ParameterSet::index_of(std::string_view name) const {
  const auto it = lookup_.find(std::string(name));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

void ParameterSet::replace(std::size_t i, Tensor value) {
  if (value.shape() != tensors_.at(i).shape()) {
    throw_invalid("replace: shape change for " + names_[i]);
  }
  tensors_[i] = std::move(value);
}

void ParameterSet::zero_grad() const {
  for (const auto& t : tensors_) t.zero_grad();
}

std::size_t ParameterSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

bool bitwise_equal(const ParameterSet& a, const ParameterSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.name(i) != b.name(i) || a[i].shape() != b[i].shape()) return false;
    const auto x = a[i].values();
    const auto y = b[i].values();
    if (std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

double round_to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

std::vector<double> glorot_uniform(std::size_t count, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> out(count);
  for (auto& v : out) v = round_to_f32(rng.uniform(-limit, limit));
  return out;
}

}  // namespace attnbn::num
