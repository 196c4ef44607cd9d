#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "attnbn/model/checkpoint.hpp"
#include "attnbn/numerics/adam.hpp"
#include "attnbn/train/loss.hpp"

namespace attnbn::train {

struct TrainConfig {
  model::VariantConfig variant = model::full_bottleneck();
  model::ModelConfig model;
  std::size_t steps = 500;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double decay = 0.9999;
  std::uint64_t seed = 1;
  /// Save a checkpoint every this many steps (0 = only the final one).
  std::size_t checkpoint_every = 0;
  /// Directory for checkpoints and the CSV log; empty keeps everything in memory.
  std::filesystem::path out_dir;
  LossWeights weights;

  void validate() const;
};

struct LogRow {
  std::size_t step = 0;  // 1-based update index
  double learning_rate = 0.0;
  LossReport loss;       // batch mean before the update
};

struct TrainResult {
  model::Network network;
  model::SeedLineage lineage;
  std::vector<LogRow> log;
};

/// Seed used to initialize the weights of a training run.
std::uint64_t init_seed_for(std::uint64_t train_seed);

/// Mini-batch Adam on the imitation loss. Each epoch visits the examples in a
/// fresh permutation drawn from a stream seeded by `config.seed`, so runs are
/// bit-reproducible. A non-finite loss or gradient aborts with kDivergence.
/// `progress` (optional) is invoked after every step.
TrainResult train(const TrainConfig& config, std::span<const scene::Example> examples,
                  const std::function<void(const LogRow&)>& progress = {});

/// Batch-mean loss of `network` on `examples` without recording a graph.
LossReport evaluate_loss(const model::Network& network, std::span<const scene::Example> examples,
                         const LossWeights& weights = {});

void write_log_csv(std::span<const LogRow> rows, const std::filesystem::path& path);

}  // namespace attnbn::train
