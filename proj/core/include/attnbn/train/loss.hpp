#pragma once

#include <vector>

#include "attnbn/model/network.hpp"
#include "attnbn/scene/raster.hpp"

namespace attnbn::train {

struct LossWeights {
  double position = 1.0;
  double heading = 0.5;
  double box = 1.0;
  double occupancy = 0.5;
};

struct LossReport {
  double position = 0.0;   // mean squared waypoint error, m^2
  double heading = 0.0;    // mean 1 - cos(heading error)
  double box = 0.0;        // mean per-pixel BCE of the box heatmaps
  double occupancy = 0.0;  // mean per-pixel BCE of the occupancy head (object branch)
  double total = 0.0;
};

struct LossResult {
  num::Tensor total;  // differentiable weighted sum
  LossReport report;
};

/// Ground-truth box heatmaps on the feature grid: the agent box at each expert
/// pose, rendered at input resolution and average-pooled by the model's factor.
std::vector<std::vector<double>> box_targets(const scene::Example& example, const model::ModelConfig& config);

/// Future occupancy pooled onto the feature grid as [h, w, K], cell-major.
std::vector<double> occupancy_targets(const scene::Example& example, const model::ModelConfig& config);

LossResult imitation_loss(const model::Rollout& rollout, const scene::Example& example,
                          const model::ModelConfig& config, const LossWeights& weights = {});

}  // namespace attnbn::train
