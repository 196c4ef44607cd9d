#include "attnbn/numerics/adam.hpp"

#include <cmath>

#include "attnbn/error.hpp"

namespace attnbn::num {

AdamState::AdamState(const ParameterSet& params, AdamConfig config)
    : config_(config), learning_rate_(config.learning_rate) {
  if (!(config.learning_rate > 0.0)) throw_invalid("adam: learning rate must be positive");
  if (!(config.decay > 0.0 && config.decay <= 1.0)) throw_invalid("adam: decay must be in (0, 1]");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params[i].size(), 0.0);
    v_.emplace_back(params[i].size(), 0.0);
  }
}

void adam_step(AdamState& state, ParameterSet& params, std::span<const std::vector<double>> grads) {
  if (grads.size() != params.size() || state.m_.size() != params.size()) {
    throw_invalid("adam: parameter/gradient count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads[i].empty() && grads[i].size() != params[i].size()) {
      throw_invalid("adam: gradient shape mismatch for " + params.name(i));
    }
    for (double g : grads[i]) {
      if (!std::isfinite(g)) {
        throw Error(ErrorCode::kDivergence, "non-finite gradient for " + params.name(i) +
                                                " at optimizer step " + std::to_string(state.step_ + 1));
      }
    }
  }

  const auto& cfg = state.config_;
  state.step_ += 1;
  const double t = static_cast<double>(state.step_);
  const double correct1 = 1.0 - std::pow(cfg.beta1, t);
  const double correct2 = 1.0 - std::pow(cfg.beta2, t);
  const double lr = state.learning_rate_;

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.m_[i];
    auto& v = state.v_[i];
    const auto current = params[i].values();
    std::vector<double> next(current.begin(), current.end());
    for (std::size_t j = 0; j < next.size(); ++j) {
      const double g = grads[i].empty() ? 0.0 : grads[i][j];
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[j] / correct1;
      const double v_hat = v[j] / correct2;
      next[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      if (cfg.round_to_f32) next[j] = round_to_f32(next[j]);
    }
    params.replace(i, Tensor::parameter(params[i].shape(), std::move(next)));
  }
  state.learning_rate_ = lr * cfg.decay;
}

void adam_step(AdamState& state, ParameterSet& params) {
  std::vector<std::vector<double>> grads(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto g = params[i].grad();
    grads[i].assign(g.begin(), g.end());
  }
  adam_step(state, params, grads);
}

}  // namespace attnbn::num
