#include "attnbn/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "attnbn/error.hpp"
#include "attnbn/eval/metrics.hpp"
#include "attnbn/numerics/random.hpp"
#include "attnbn/numerics/tensor.hpp"

namespace attnbn::eval {

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<std::vector<double>> pooled_occupancy(const scene::Example& ex, std::size_t factor) {
  std::vector<std::vector<double>> out;
  for (const auto& g : ex.future_object_occupancy) {
    out.push_back(scene::downsample(g, ex.raster.resolution, static_cast<int>(factor)));
  }
  return out;
}

void finish(Evaluation& e, const std::string& label) {
  e.row.variant = label;
  e.row.ade = mean_of(e.ade);
  e.row.fde = mean_of(e.fde);
  e.row.collision = mean_of(e.collision);
  if (!e.entropy.empty()) e.row.entropy = mean_of(e.entropy);
  e.row.count = e.ade.size();
}

// Agent box at each predicted pose, average-pooled onto the feature grid.
std::vector<std::vector<double>> rendered_boxes(std::span<const scene::Pose> poses, int resolution) {
  scene::GridConfig grid;
  grid.resolution = resolution;
  std::vector<std::vector<double>> out;
  for (const auto& p : poses) {
    out.push_back(scene::downsample(scene::render_box(grid, {p, scene::kAgentLength, scene::kAgentWidth}),
                                    resolution, static_cast<int>(model::ModelConfig::kDownsample)));
  }
  return out;
}

}  // namespace

Evaluation evaluate(const model::Network& network, std::span<const scene::Example> examples,
                    const std::string& variant_label) {
  num::NoGradGuard guard;
  Evaluation e;
  for (const auto& ex : examples) {
    const auto rollout = network.rollout(ex.raster);
    const auto pred = positions(rollout.poses());
    const auto gt = positions(ex.expert_future);
    e.ade.push_back(ade(pred, gt));
    e.fde.push_back(fde(pred, gt));
    std::vector<std::vector<double>> boxes;
    for (const auto& b : rollout.box) boxes.emplace_back(b.values().begin(), b.values().end());
    e.collision.push_back(collision_rate(boxes, pooled_occupancy(ex, model::ModelConfig::kDownsample)));
    if (rollout.alpha.defined()) {
      e.entropy.push_back(attention_entropy(rollout.alpha.values()));
      e.alpha_values.insert(e.alpha_values.end(), rollout.alpha.values().begin(), rollout.alpha.values().end());
    }
  }
  finish(e, variant_label);
  return e;
}

std::vector<scene::Pose> constant_velocity_prediction(const scene::Example& example) {
  if (example.agent_past.empty()) throw_invalid("constant velocity: example has no past poses");
  // The agent sits at the origin facing +y; the last past pose is one step back.
  const scene::Vec2 step = scene::Vec2{0.0, 0.0} - example.agent_past.back().position;
  const double heading = std::atan2(step.y, step.x);
  std::vector<scene::Pose> out;
  for (std::size_t k = 1; k <= example.expert_future.size(); ++k) {
    out.push_back({step * static_cast<double>(k), scene::norm(step) > 0 ? heading : 0.5 * std::acos(-1.0)});
  }
  return out;
}

Evaluation evaluate_constant_velocity(std::span<const scene::Example> examples) {
  Evaluation e;
  for (const auto& ex : examples) {
    const auto poses = constant_velocity_prediction(ex);
    const auto pred = positions(poses);
    const auto gt = positions(ex.expert_future);
    e.ade.push_back(ade(pred, gt));
    e.fde.push_back(fde(pred, gt));
    e.collision.push_back(collision_rate(rendered_boxes(poses, ex.raster.resolution),
                                         pooled_occupancy(ex, model::ModelConfig::kDownsample)));
  }
  finish(e, "constant_velocity");
  return e;
}

Interval bootstrap_mean_difference(std::span<const double> a, std::span<const double> b, std::size_t resamples,
                                   std::uint64_t seed, double level) {
  if (a.size() != b.size() || a.empty()) throw_invalid("bootstrap: samples must be paired and non-empty");
  if (resamples == 0 || !(level > 0 && level < 1)) throw_invalid("bootstrap: bad resamples or level");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  num::Rng rng(seed);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += diff[rng.below(n)];
    m = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, resamples - 1);
    return means[lo] + (means[hi] - means[lo]) * (pos - static_cast<double>(lo));
  };
  double total = 0.0;
  for (double d : diff) total += d;
  return {total / static_cast<double>(n), quantile(tail), quantile(1.0 - tail)};
}

// Quotes a label only when it contains a separator or a quote.
static std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + '"';
}

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write metrics '" + path.string() + "'");
  out.precision(10);
  out << "variant,ade,fde,collision,entropy,count\n";
  for (const auto& r : rows) {
    out << csv_field(r.variant) << ',' << r.ade << ',' << r.fde << ',' << r.collision << ',';
    if (r.entropy) out << *r.entropy;
    out << ',' << r.count << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

void write_histogram_csv(std::span<const HistogramSeries> series, std::size_t bins, double upper,
                         const std::filesystem::path& path) {
  if (bins == 0 || !(upper > 0)) throw_invalid("histogram: bins and upper bound must be positive");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write histogram '" + path.string() + "'");
  out.precision(10);
  out << "variant,bin_lower,bin_upper,count\n";
  const double width = upper / static_cast<double>(bins);
  for (const auto& s : series) {
    std::vector<std::size_t> counts(bins, 0);
    for (double v : s.values) {
      const auto b = static_cast<std::size_t>(std::clamp(v / width, 0.0, static_cast<double>(bins - 1)));
      ++counts[b];
    }
    for (std::size_t b = 0; b < bins; ++b) {
      out << csv_field(s.label) << ',' << width * static_cast<double>(b) << ',' << width * static_cast<double>(b + 1)
          << ',' << counts[b] << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

}  // namespace attnbn::eval
