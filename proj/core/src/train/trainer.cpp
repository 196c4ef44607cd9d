#include "attnbn/train/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "attnbn/error.hpp"
#include "attnbn/numerics/ops.hpp"

namespace attnbn::train {

void TrainConfig::validate() const {
  if (batch_size < 1) throw_invalid("batch size must be >= 1");
  if (!(learning_rate > 0)) throw_invalid("learning rate must be positive");
  if (!(decay > 0 && decay <= 1)) throw_invalid("decay must lie in (0, 1]");
  variant.validate();
  model.validate();
}

std::uint64_t init_seed_for(std::uint64_t train_seed) { return num::mix_seed(train_seed, 0x1a17); }

namespace {

void add_report(LossReport& acc, const LossReport& r, double w) {
  acc.position += w * r.position;
  acc.heading += w * r.heading;
  acc.box += w * r.box;
  acc.occupancy += w * r.occupancy;
  acc.total += w * r.total;
}

class EpochSampler {
 public:
  EpochSampler(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) { reshuffle(); }

  std::size_t next() {
    if (pos_ == order_.size()) reshuffle();
    return order_[pos_++];
  }

 private:
  void reshuffle() {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_.below(i)]);
    pos_ = 0;
  }

  std::vector<std::size_t> order_;
  num::Rng rng_;
  std::size_t pos_ = 0;
};

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t step) {
  return dir / ("checkpoint_step" + std::to_string(step) + ".abck");
}

}  // namespace

TrainResult train(const TrainConfig& config, std::span<const scene::Example> examples,
                  const std::function<void(const LogRow&)>& progress) {
  config.validate();
  if (config.steps > 0 && examples.empty()) throw_invalid("train: dataset is empty");

  TrainResult result{model::Network(config.variant, config.model, init_seed_for(config.seed)),
                     {init_seed_for(config.seed), config.seed, 0}, {}};
  auto& net = result.network;
  auto& params = net.parameters();
  num::AdamState adam(params, {config.learning_rate, 0.9, 0.999, 1e-8, config.decay, true});
  EpochSampler sampler(examples.size(), num::mix_seed(config.seed, 0x5407));

  if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);
  const double inv_batch = 1.0 / static_cast<double>(config.batch_size);

  for (std::size_t step = 1; step <= config.steps; ++step) {
    LogRow row;
    row.step = step;
    row.learning_rate = adam.learning_rate();
    params.zero_grad();
    try {
      for (std::size_t b = 0; b < config.batch_size; ++b) {
        const auto& ex = examples[sampler.next()];
        const auto rollout = net.rollout(ex.raster);
        const auto loss = imitation_loss(rollout, ex, config.model, config.weights);
        num::backward(num::scale(loss.total, inv_batch));
        add_report(row.loss, loss.report, inv_batch);
      }
      num::adam_step(adam, params);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFinite && e.code() != ErrorCode::kDivergence) throw;
      throw Error(ErrorCode::kDivergence, "training diverged at step " + std::to_string(step) + ": " + e.what());
    }
    result.lineage.steps = step;
    result.log.push_back(row);
    if (progress) progress(row);
    if (!config.out_dir.empty() && config.checkpoint_every > 0 && step % config.checkpoint_every == 0) {
      model::save_checkpoint(net, result.lineage, checkpoint_path(config.out_dir, step));
    }
  }
  params.zero_grad();
  if (!config.out_dir.empty()) {
    model::save_checkpoint(net, result.lineage, config.out_dir / "final.abck");
    write_log_csv(result.log, config.out_dir / "train_log.csv");
  }
  return result;
}

LossReport evaluate_loss(const model::Network& network, std::span<const scene::Example> examples,
                         const LossWeights& weights) {
  num::NoGradGuard guard;
  LossReport acc;
  if (examples.empty()) return acc;
  const double w = 1.0 / static_cast<double>(examples.size());
  for (const auto& ex : examples) {
    add_report(acc, imitation_loss(network.rollout(ex.raster), ex, network.config(), weights).report, w);
  }
  return acc;
}

void write_log_csv(std::span<const LogRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write log '" + path.string() + "'");
  out.precision(17);
  out << "step,lr,position,heading,box,occupancy,total\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.learning_rate << ',' << r.loss.position << ',' << r.loss.heading << ','
        << r.loss.box << ',' << r.loss.occupancy << ',' << r.loss.total << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

}  // namespace attnbn::train
