#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "attnbn/error.hpp"
#include "attnbn/numerics/random.hpp"
#include "attnbn/scene/generator.hpp"
#include "attnbn/scene/raster.hpp"
#include "attnbn/train/loss.hpp"

namespace attnbn::train {
namespace {

using num::Tensor;

const scene::GridConfig kGrid{16.0, 64};

model::Rollout rollout_from(const std::vector<scene::Pose>& poses, const std::vector<std::vector<double>>& box_logits) {
  model::Rollout r;
  for (std::size_t k = 0; k < poses.size(); ++k) {
    r.position_m.push_back(Tensor::constant({2}, {poses[k].position.x, poses[k].position.y}));
    r.heading.push_back(Tensor::constant({1}, {poses[k].heading}));
    r.box_logits.push_back(Tensor::constant({16, 16}, box_logits[k]));
  }
  return r;
}

double bce(double x, double t) {
  const double p = 1.0 / (1.0 + std::exp(-x));
  return -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
}

class LossTest : public ::testing::Test {
 protected:
  scene::Example ex_ = scene::make_example(scene::generate_scenario(scene::ScenarioKind::kStopSign, 4), kGrid);
  model::ModelConfig config_;
};

TEST_F(LossTest, PerfectPredictionHasZeroPositionAndHeadingLoss) {
  const auto r = rollout_from(ex_.expert_future, std::vector<std::vector<double>>(10, std::vector<double>(256, 0.0)));
  const auto report = imitation_loss(r, ex_, config_).report;
  EXPECT_EQ(report.position, 0.0);
  EXPECT_EQ(report.heading, 0.0);
}

TEST_F(LossTest, HeadingOffByPiCostsTwo) {
  auto poses = ex_.expert_future;
  for (auto& p : poses) p.heading += std::numbers::pi;
  const auto r = rollout_from(poses, std::vector<std::vector<double>>(10, std::vector<double>(256, 0.0)));
  EXPECT_NEAR(imitation_loss(r, ex_, config_).report.heading, 2.0, 1e-12);
}

TEST_F(LossTest, MatchesScalarRecomputation) {
  num::Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<scene::Pose> poses;
    std::vector<std::vector<double>> logits(10, std::vector<double>(256));
    for (std::size_t k = 0; k < 10; ++k) {
      poses.push_back({{rng.uniform(-3, 3), rng.uniform(0, 8)}, rng.uniform(0, 3)});
      for (auto& l : logits[k]) l = 2.0 * rng.normal();
    }
    const auto targets = box_targets(ex_, config_);
    double pos = 0, head = 0, box = 0;
    for (std::size_t k = 0; k < 10; ++k) {
      const auto& g = ex_.expert_future[k];
      pos += std::pow(poses[k].position.x - g.position.x, 2) + std::pow(poses[k].position.y - g.position.y, 2);
      head += 1.0 - std::cos(poses[k].heading - g.heading);
      double b = 0;
      for (std::size_t i = 0; i < 256; ++i) b += bce(logits[k][i], targets[k][i]);
      box += b / 256.0;
    }
    pos /= 10;
    head /= 10;
    box /= 10;
    const auto report = imitation_loss(rollout_from(poses, logits), ex_, config_).report;
    EXPECT_NEAR(report.position, pos, 1e-9);
    EXPECT_NEAR(report.heading, head, 1e-9);
    EXPECT_NEAR(report.box, box, 1e-9);
    EXPECT_NEAR(report.total, pos + 0.5 * head + box, 1e-9);
  }
}

TEST_F(LossTest, HorizonMismatchIsInvalid) {
  auto poses = ex_.expert_future;
  poses.pop_back();
  const auto r = rollout_from(poses, std::vector<std::vector<double>>(9, std::vector<double>(256, 0.0)));
  EXPECT_THROW((void)imitation_loss(r, ex_, config_), Error);
}

TEST_F(LossTest, BoxTargetsCoverTheAgentFootprint) {
  const auto targets = box_targets(ex_, config_);
  ASSERT_EQ(targets.size(), 10u);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    double mass = 0;
    for (double v : targets[k]) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      mass += v;
    }
    // Pixel centers inside the 4 m x 1.8 m box, 16 pixels per 1 m cell.
    const auto& pose = ex_.expert_future[k];
    const double c = std::cos(pose.heading), s = std::sin(pose.heading);
    int inside = 0;
    for (int row = 0; row < 64; ++row) {
      for (int col = 0; col < 64; ++col) {
        const double dx = (col + 0.5 - 32.0) * 0.25 - pose.position.x;
        const double dy = (48.0 - (row + 0.5)) * 0.25 - pose.position.y;
        inside += std::abs(dx * c + dy * s) <= 2.0 && std::abs(-dx * s + dy * c) <= 0.9;
      }
    }
    EXPECT_NEAR(mass, inside / 16.0, 1e-9) << k;
  }
}

TEST(OccupancyTargets, EmptySceneIsAllZeros) {
  const auto ex = scene::make_example(scene::straight_road_scene(4.0, 4.0), kGrid);
  for (double v : occupancy_targets(ex, model::ModelConfig{})) EXPECT_EQ(v, 0.0);
}

}  // namespace
}  // namespace attnbn::train
