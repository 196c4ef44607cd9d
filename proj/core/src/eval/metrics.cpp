#include "attnbn/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "attnbn/error.hpp"

namespace attnbn::eval {

namespace {

void require_pair(std::span<const Vec2> pred, std::span<const Vec2> gt, const char* op) {
  if (pred.size() != gt.size()) {
    throw_invalid(std::string(op) + ": " + std::to_string(pred.size()) + " predicted vs " +
                  std::to_string(gt.size()) + " ground-truth waypoints");
  }
  if (pred.empty()) throw_invalid(std::string(op) + ": no waypoints");
}

}  // namespace

double ade(std::span<const Vec2> pred, std::span<const Vec2> gt) {
  require_pair(pred, gt, "ade");
  double total = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) total += scene::norm(pred[k] - gt[k]);
  return total / static_cast<double>(pred.size());
}

double fde(std::span<const Vec2> pred, std::span<const Vec2> gt) {
  require_pair(pred, gt, "fde");
  return scene::norm(pred.back() - gt.back());
}

double max_step_error(std::span<const Vec2> pred, std::span<const Vec2> gt) {
  require_pair(pred, gt, "max_step_error");
  double m = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) m = std::max(m, scene::norm(pred[k] - gt[k]));
  return m;
}

std::vector<Vec2> positions(std::span<const scene::Pose> poses) {
  std::vector<Vec2> out;
  out.reserve(poses.size());
  for (const auto& p : poses) out.push_back(p.position);
  return out;
}

double collision_rate(std::span<const std::vector<double>> agent_heatmaps,
                      std::span<const std::vector<double>> object_occupancy) {
  if (agent_heatmaps.size() != object_occupancy.size() || agent_heatmaps.empty()) {
    throw_invalid("collision_rate: step counts differ or are zero");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < agent_heatmaps.size(); ++k) {
    const auto& b = agent_heatmaps[k];
    const auto& o = object_occupancy[k];
    if (b.size() != o.size()) throw_invalid("collision_rate: grid sizes differ at step " + std::to_string(k));
    double overlap = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) overlap += b[i] * o[i];
    total += overlap;
  }
  return total / static_cast<double>(agent_heatmaps.size());
}

double attention_entropy(std::span<const double> alpha) {
  double mass = 0.0, h = 0.0;
  for (double a : alpha) {
    if (!(a >= 0.0)) throw_invalid("attention_entropy: negative or non-finite weight");
    mass += a;
    if (a > 0.0) h -= a * std::log(a);
  }
  if (std::abs(mass - 1.0) > 1e-4) {
    throw_invalid("attention_entropy: weights sum to " + std::to_string(mass) + ", not 1");
  }
  return h;
}

double attention_mass_in_region(std::span<const double> alpha, const scene::GridConfig& grid,
                                std::span<const scene::OrientedBox> region, double dilation_m) {
  const std::size_t side = static_cast<std::size_t>(grid.resolution);
  if (alpha.size() != side * side) throw_invalid("attention_mass_in_region: map does not match grid");
  double mass = 0.0;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const Vec2 m = grid.to_meters({static_cast<double>(c) + 0.5, static_cast<double>(r) + 0.5});
      for (const auto& box : region) {
        if (scene::distance_to_box(m, box) <= dilation_m) {
          mass += alpha[r * side + c];
          break;
        }
      }
    }
  }
  return mass;
}

}  // namespace attnbn::eval
