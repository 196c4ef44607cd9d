#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "attnbn/error.hpp"
#include "attnbn/eval/metrics.hpp"
#include "attnbn/eval/report.hpp"
#include "attnbn/eval/upsample.hpp"
#include "attnbn/numerics/random.hpp"
#include "attnbn/scene/generator.hpp"
#include "attnbn/scene/raster.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

namespace attnbn::eval {
namespace {

using num::Rng;

std::vector<Vec2> random_path(Rng& rng, std::size_t n) {
  std::vector<Vec2> p(n);
  for (auto& v : p) v = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
  return p;
}

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> a(n);
  double total = 0;
  for (auto& x : a) total += x = rng.uniform() * rng.uniform();
  for (auto& x : a) x /= total;
  return a;
}

TEST(Displacement, Basics) {
  const std::vector<Vec2> gt = {{0, 1}, {0, 2}, {0, 3}};
  EXPECT_EQ(ade(gt, gt), 0.0);
  EXPECT_EQ(fde(gt, gt), 0.0);
  std::vector<Vec2> shifted = gt;
  for (auto& p : shifted) p.x += 1.0;
  EXPECT_DOUBLE_EQ(ade(shifted, gt), 1.0);
  std::vector<Vec2> last = gt;
  last.back() = {3.0, 7.0};
  EXPECT_DOUBLE_EQ(fde(last, gt), 5.0);
  EXPECT_DOUBLE_EQ(max_step_error(last, gt), 5.0);
  EXPECT_THROW((void)ade(std::vector<Vec2>(2), gt), Error);
}

TEST(Displacement, MatchesLoopOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_path(rng, 10), b = random_path(rng, 10);
    EXPECT_NEAR(ade(a, b), testing::loop_ade(a, b), 1e-12);
    EXPECT_NEAR(fde(a, b), testing::loop_fde(a, b), 1e-12);
  }
}

TEST(Collision, DisjointIdenticalAndOracle) {
  std::vector<std::vector<double>> b(3, std::vector<double>(16, 0.0)), o = b;
  for (auto& g : b) g[0] = 1.0;
  for (auto& g : o) g[5] = 1.0;
  EXPECT_EQ(collision_rate(b, o), 0.0);
  EXPECT_EQ(collision_rate(b, b), 1.0);
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    for (auto& g : b) for (auto& v : g) v = rng.uniform();
    for (auto& g : o) for (auto& v : g) v = rng.uniform();
    EXPECT_NEAR(collision_rate(b, o), testing::loop_collision(b, o), 1e-12);
  }
  o.pop_back();
  EXPECT_THROW((void)collision_rate(b, o), Error);
}

TEST(Entropy, ClosedForms) {
  EXPECT_NEAR(attention_entropy(std::vector<double>(256, 1.0 / 256.0)), std::log(256.0), 1e-9);
  std::vector<double> one_hot(16, 0.0);
  one_hot[3] = 1.0;
  EXPECT_EQ(attention_entropy(one_hot), 0.0);
  EXPECT_NEAR(attention_entropy(std::vector<double>{0.5, 0.25, 0.25}), 1.5 * std::log(2.0), 1e-15);
  EXPECT_THROW((void)attention_entropy(std::vector<double>{0.5, 0.4}), Error);
  EXPECT_THROW((void)attention_entropy(std::vector<double>{1.2, -0.2}), Error);
}

TEST(Entropy, MatchesLoopOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_simplex(rng, 256);
    EXPECT_NEAR(attention_entropy(a), testing::loop_entropy(a), 1e-12);
  }
}

TEST(MassInRegion, FullCoverEmptyAndOracle) {
  const scene::GridConfig grid{16.0, 64};
  Rng rng(4);
  const auto alpha = random_simplex(rng, 64 * 64);
  const std::vector<scene::OrientedBox> everything = {{{{0.0, 4.0}, 0.0}, 40.0, 40.0}};
  EXPECT_NEAR(attention_mass_in_region(alpha, grid, everything, 0.0), 1.0, 1e-12);
  const std::vector<scene::OrientedBox> far = {{{{100.0, 100.0}, 0.0}, 1.0, 1.0}};
  EXPECT_EQ(attention_mass_in_region(alpha, grid, far, 1.0), 0.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_simplex(rng, 64 * 64);
    std::vector<scene::OrientedBox> boxes;
    for (int i = 0; i < 2; ++i) {
      boxes.push_back({{{rng.uniform(-6, 6), rng.uniform(-3, 10)}, rng.uniform(-3, 3)}, rng.uniform(0.3, 4),
                       rng.uniform(0.3, 3)});
    }
    const double dilation = rng.uniform(0.0, 3.0);
    EXPECT_NEAR(attention_mass_in_region(a, grid, boxes, dilation),
                testing::loop_mass_in_region(a, grid, boxes, dilation), 1e-12);
  }
}

TEST(Upsample, ConstantStaysConstant) {
  const auto up = upsample_pyramid(std::vector<double>(16, 0.25), 4, 4, 16, 16);
  ASSERT_EQ(up.size(), 256u);
  for (double v : up) EXPECT_NEAR(v, 0.25 / 16.0, 1e-15);
}

TEST(Upsample, MassIsPreserved) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_simplex(rng, 256);
    const auto up = upsample_pyramid(a, 16, 16, 64, 64);
    double total = 0;
    for (double v : up) {
      EXPECT_GE(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
}

TEST(Upsample, OneHotIsAUnimodalBlobOnItsFootprint) {
  std::vector<double> a(256, 0.0);
  const std::size_t r = 5, c = 9;
  a[r * 16 + c] = 1.0;
  const auto up = upsample_pyramid(a, 16, 16, 64, 64);
  const auto peak = std::max_element(up.begin(), up.end()) - up.begin();
  const auto pr = static_cast<std::size_t>(peak) / 64, pc = static_cast<std::size_t>(peak) % 64;
  EXPECT_GE(pr, 4 * r);
  EXPECT_LT(pr, 4 * r + 4);
  EXPECT_GE(pc, 4 * c);
  EXPECT_LT(pc, 4 * c + 4);
  // Non-increasing moving away from the footprint along the row.
  for (std::size_t x = 4 * c + 4; x + 1 < 64; ++x) EXPECT_GE(up[pr * 64 + x], up[pr * 64 + x + 1]);
  for (std::size_t x = 4 * c; x > 0; --x) EXPECT_GE(up[pr * 64 + x], up[pr * 64 + x - 1]);
}

TEST(Upsample, NonIntegerFactorIsInvalid) {
  EXPECT_THROW((void)upsample_pyramid(std::vector<double>(16, 1.0), 4, 4, 10, 10), Error);
}

TEST(ConstantVelocity, ExtrapolatesTheLastDisplacement) {
  const auto ex = scene::make_example(scene::straight_road_scene(4.0, 4.0), scene::GridConfig{});
  const auto pred = constant_velocity_prediction(ex);
  ASSERT_EQ(pred.size(), 10u);
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_NEAR(pred[k].position.y, ex.expert_future[k].position.y, 1e-5);
    EXPECT_NEAR(pred[k].position.x, 0.0, 1e-5);
  }
}

TEST(Bootstrap, IntervalBracketsTheMeanDifference) {
  Rng rng(6);
  std::vector<double> a(200), b(200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    b[i] = rng.normal();
    a[i] = b[i] + 0.5 + 0.1 * rng.normal();
  }
  const auto ci = bootstrap_mean_difference(a, b, 2000, 1);
  EXPECT_LT(ci.lower, ci.mean);
  EXPECT_GT(ci.upper, ci.mean);
  EXPECT_GT(ci.lower, 0.4);
  EXPECT_LT(ci.upper, 0.6);
  const auto again = bootstrap_mean_difference(a, b, 2000, 1);
  EXPECT_EQ(ci.lower, again.lower);
}

TEST(Report, MetricsCsvHasEmptyEntropyWithoutAttention) {
  testing::TempDir dir;
  const std::vector<MetricsRow> rows = {{"A", 1.0, 2.0, 0.1, std::nullopt, 5}, {"B", 0.5, 1.0, 0.0, 3.0, 5}};
  write_metrics_csv(rows, dir / "m.csv");
  std::ifstream in(dir / "m.csv");
  std::string header, a, b;
  std::getline(in, header);
  std::getline(in, a);
  std::getline(in, b);
  EXPECT_EQ(header, "variant,ade,fde,collision,entropy,count");
  EXPECT_EQ(a.substr(0, 2), "A,");
  EXPECT_NE(a.find(",,"), std::string::npos);
  EXPECT_EQ(b.find(",,"), std::string::npos);
}

}  // namespace
}  // namespace attnbn::eval
