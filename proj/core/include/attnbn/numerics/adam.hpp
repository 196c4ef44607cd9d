#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "attnbn/numerics/parameters.hpp"

namespace attnbn::num {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Learning rate is multiplied by this after every step.
  double decay = 0.9999;
  /// Keep updated parameters representable as 32-bit floats.
  bool round_to_f32 = false;
};

class AdamState {
 public:
  AdamState(const ParameterSet& params, AdamConfig config);

  const AdamConfig& config() const { return config_; }
  std::size_t step() const { return step_; }
  /// Rate applied by the next step.
  double learning_rate() const { return learning_rate_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  friend void adam_step(AdamState&, ParameterSet&, std::span<const std::vector<double>>);

  AdamConfig config_;
  std::size_t step_ = 0;
  double learning_rate_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Bias-corrected Adam update using explicit gradients (one per parameter;
/// an empty vector means zero gradient). Throws kDivergence on NaN/Inf.
void adam_step(AdamState& state, ParameterSet& params, std::span<const std::vector<double>> grads);

/// Same, reading the gradients accumulated on the parameter leaves.
void adam_step(AdamState& state, ParameterSet& params);

}  // namespace attnbn::num
