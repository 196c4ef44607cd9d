#include "attnbn/train/loss.hpp"

#include "attnbn/error.hpp"
#include "attnbn/numerics/ops.hpp"

namespace attnbn::train {

using num::Tensor;

namespace {

scene::GridConfig input_grid(const model::ModelConfig& config) {
  scene::GridConfig g;
  g.field_of_view_m = config.field_of_view_m;
  g.resolution = static_cast<int>(config.resolution);
  return g;
}

}  // namespace

std::vector<std::vector<double>> box_targets(const scene::Example& example, const model::ModelConfig& config) {
  const auto grid = input_grid(config);
  const int factor = static_cast<int>(model::ModelConfig::kDownsample);
  std::vector<std::vector<double>> out;
  out.reserve(example.expert_future.size());
  for (const auto& pose : example.expert_future) {
    const auto full = scene::render_box(grid, {pose, scene::kAgentLength, scene::kAgentWidth});
    out.push_back(scene::downsample(full, grid.resolution, factor));
  }
  return out;
}

std::vector<double> occupancy_targets(const scene::Example& example, const model::ModelConfig& config) {
  const int factor = static_cast<int>(model::ModelConfig::kDownsample);
  const std::size_t k_count = example.future_object_occupancy.size();
  const std::size_t cells = config.feature_resolution() * config.feature_resolution();
  std::vector<double> out(cells * k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto pooled = scene::downsample(example.future_object_occupancy[k], static_cast<int>(config.resolution), factor);
    for (std::size_t i = 0; i < cells; ++i) out[i * k_count + k] = pooled[i];
  }
  return out;
}

LossResult imitation_loss(const model::Rollout& rollout, const scene::Example& example,
                          const model::ModelConfig& config, const LossWeights& weights) {
  const std::size_t k_count = example.expert_future.size();
  if (rollout.position_m.size() != k_count || rollout.heading.size() != k_count ||
      rollout.box_logits.size() != k_count) {
    throw_invalid("imitation_loss: rollout has " + std::to_string(rollout.position_m.size()) +
                  " steps, example has K=" + std::to_string(k_count));
  }
  const double inv_k = 1.0 / static_cast<double>(k_count);
  const auto boxes = box_targets(example, config);

  Tensor position, heading, box;
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto& gt = example.expert_future[k];
    const Tensor diff = num::sub(rollout.position_m[k], Tensor::constant({2}, {gt.position.x, gt.position.y}));
    const Tensor sq = num::sum(num::mul(diff, diff));
    const Tensor miss = num::scale(num::add_scalar(num::cos(num::add_scalar(rollout.heading[k], -gt.heading)), -1.0), -1.0);
    const Tensor bce = num::bce_with_logits(rollout.box_logits[k], boxes[k]);
    position = position.defined() ? num::add(position, sq) : sq;
    heading = heading.defined() ? num::add(heading, miss) : miss;
    box = box.defined() ? num::add(box, bce) : bce;
  }
  position = num::scale(position, inv_k);
  heading = num::scale(heading, inv_k);
  box = num::scale(box, inv_k);

  Tensor total = num::add(num::add(num::scale(position, weights.position), num::scale(heading, weights.heading)),
                          num::scale(box, weights.box));
  LossResult result;
  if (rollout.occupancy_logits.defined()) {
    if (example.future_object_occupancy.size() != k_count) {
      throw_invalid("imitation_loss: occupancy targets do not have K grids");
    }
    const Tensor occ = num::bce_with_logits(rollout.occupancy_logits, occupancy_targets(example, config));
    result.report.occupancy = occ.item();
    total = num::add(total, num::scale(occ, weights.occupancy));
  }
  result.report.position = position.item();
  result.report.heading = heading.item();
  result.report.box = box.item();
  result.report.total = total.item();
  result.total = total;
  return result;
}

}  // namespace attnbn::train
