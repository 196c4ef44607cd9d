#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "attnbn/numerics/random.hpp"
#include "attnbn/scene/generator.hpp"
#include "attnbn/scene/raster.hpp"

namespace attnbn::scene {
namespace {

const GridConfig kGrid{16.0, 64};

// Pixel center (col, row) in agent meters, written out independently of GridConfig.
Vec2 center_m(int col, int row) { return {(col + 0.5 - 32.0) * 0.25, (48.0 - (row + 0.5)) * 0.25}; }

TEST(Raster, ChannelLayout) {
  const auto r = rasterize(straight_road_scene(4.0, 4.0), kGrid);
  EXPECT_EQ(r.channels.size(), 17u);
  EXPECT_EQ(r.names, channel_names());
  EXPECT_EQ(r.dense_subset_names.size(), 5u);
  for (const auto& n : r.dense_subset_names) {
    EXPECT_EQ(n.find("traffic_lights"), std::string::npos);
    EXPECT_EQ(n.find("dynamic_objects"), std::string::npos);
  }
}

TEST(Raster, EmptySceneOnlyShowsTheAgent) {
  VectorScene s;
  s.agent_pose = {{5.0, -3.0}, 0.4};
  s.agent_past.fill(s.agent_pose);
  const auto r = rasterize(s, kGrid);
  const OrientedBox agent{{{0.0, 0.0}, 1.5707963267948966}, s.agent_length, s.agent_width};
  for (std::size_t c = 0; c < r.channels.size(); ++c) {
    const auto& name = r.names[c];
    for (int row = 0; row < 64; ++row) {
      for (int col = 0; col < 64; ++col) {
        const float v = r.channels[c][row * 64 + col];
        if (name == "current_agent_box") {
          EXPECT_EQ(v, point_in_box(center_m(col, row), agent) ? 1.0f : 0.0f);
        } else if (name == "past_agent_poses") {
          // The agent's own history sits under its box when it has not moved.
          if (v > 0) EXPECT_TRUE(point_in_box(center_m(col, row), agent));
        } else {
          EXPECT_EQ(v, 0.0f) << name;
        }
      }
    }
  }
}

TEST(Raster, AxisAlignedBoxMatchesPointInBoxOracle) {
  // 2 m x 1 m box centred at (0.3, 1.1); edges avoid pixel centers.
  const Grid g = render_box(kGrid, {{{0.3, 1.1}, 0.0}, 2.0, 1.0});
  int occupied = 0;
  for (int row = 0; row < 64; ++row) {
    for (int col = 0; col < 64; ++col) {
      const Vec2 m = center_m(col, row);
      const bool inside = std::abs(m.x - 0.3) <= 1.0 && std::abs(m.y - 1.1) <= 0.5;
      EXPECT_EQ(g[row * 64 + col], inside ? 1.0f : 0.0f) << col << "," << row;
      occupied += inside;
    }
  }
  EXPECT_EQ(occupied, 8 * 4);
}

TEST(Raster, RotatedBoxMatchesOracle) {
  num::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const OrientedBox box{{{rng.uniform(-5, 5), rng.uniform(-3, 8)}, rng.uniform(-3, 3)},
                          rng.uniform(0.5, 5.0), rng.uniform(0.5, 3.0)};
    const Grid g = render_box(kGrid, box);
    const double c = std::cos(box.pose.heading), s = std::sin(box.pose.heading);
    for (int row = 0; row < 64; ++row) {
      for (int col = 0; col < 64; ++col) {
        const Vec2 m = center_m(col, row);
        const double dx = m.x - box.pose.position.x, dy = m.y - box.pose.position.y;
        const double along = c * dx + s * dy, across = -s * dx + c * dy;
        const bool inside = std::abs(along) <= box.length / 2 && std::abs(across) <= box.width / 2;
        EXPECT_EQ(g[row * 64 + col], inside ? 1.0f : 0.0f);
      }
    }
  }
}

TEST(Raster, RedLightBrighterThanGreen) {
  auto with_light = [](LightState state) {
    VectorScene s = straight_road_scene(4.0, 4.0);
    TrafficLight light;
    light.id = 30;
    light.lane_id = s.route_lane_id;
    light.station = s.route.project(s.agent_pose.position) + 6.0;
    light.states.fill(state);
    s.traffic_lights.push_back(light);
    return rasterize(s, kGrid);
  };
  const auto red_raster = with_light(LightState::kRed);
  const auto green_raster = with_light(LightState::kGreen);
  const auto red = red_raster.channel("traffic_lights_t-0");
  const auto green = green_raster.channel("traffic_lights_t-0");
  int lit = 0;
  for (std::size_t i = 0; i < red.size(); ++i) {
    if (green[i] > 0.0f) {
      EXPECT_GT(red[i], green[i]);
      ++lit;
    }
  }
  EXPECT_GT(lit, 10);
  EXPECT_GT(light_gray_level(LightState::kRed), light_gray_level(LightState::kYellow));
  EXPECT_GT(light_gray_level(LightState::kYellow), light_gray_level(LightState::kGreen));
  EXPECT_EQ(light_gray_level(LightState::kUnknown), 0.0);
}

TEST(Raster, ValuesStayInUnitInterval) {
  for (auto kind : kAllScenarioKinds) {
    const auto r = rasterize(generate_scenario(kind, 9), kGrid);
    for (const auto& ch : r.channels) {
      for (float v : ch) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
      }
    }
  }
}

TEST(Raster, RigidMotionOfTheWholeSceneLeavesTheRasterUnchanged) {
  for (auto kind : kAllScenarioKinds) {
    const VectorScene s = generate_scenario(kind, 21);
    const VectorScene m = transformed(s, {1.1, {37.0, -12.5}});
    const auto a = rasterize(s, kGrid);
    const auto b = rasterize(m, kGrid);
    std::size_t differing = 0, total = 0;
    for (std::size_t c = 0; c < a.channels.size(); ++c) {
      for (std::size_t i = 0; i < a.channels[c].size(); ++i) {
        differing += std::abs(a.channels[c][i] - b.channels[c][i]) > 1e-6f;
        ++total;
      }
    }
    // Only pixel centers lying on a shape boundary (to rounding) may flip.
    EXPECT_LT(static_cast<double>(differing) / static_cast<double>(total), 1e-3) << to_string(kind);
  }
}

TEST(Raster, SpeedLimitChannelEncodesLimit) {
  const auto r = rasterize(straight_road_scene(4.0, 4.0), kGrid);
  const auto ch = r.channel("speed_limit");
  EXPECT_FLOAT_EQ(*std::max_element(ch.begin(), ch.end()), 0.4f);
}

TEST(Example, WaypointsInPixelsFollowTheLaneUpward) {
  const Example ex = make_example(straight_road_scene(5.0, 5.0), kGrid);
  const auto px = waypoints_in_pixels(ex, kGrid);
  ASSERT_EQ(px.size(), kHorizon);
  for (std::size_t k = 0; k < kHorizon; ++k) {
    EXPECT_NEAR(px[k].x, 32.0, 1e-5);
    EXPECT_NEAR(px[k].y, 48.0 - 4.0 * static_cast<double>(k + 1), 1e-5);
    EXPECT_NEAR(ex.expert_future[k].heading, 1.5707963267948966, 1e-6);
  }
}

TEST(Example, FloatFieldsAreFloatRepresentable) {
  const Example ex = make_example(generate_scenario(ScenarioKind::kCurvedRoad, 4), kGrid);
  for (const auto& p : ex.expert_future) {
    EXPECT_EQ(p.position.x, static_cast<double>(static_cast<float>(p.position.x)));
    EXPECT_EQ(p.heading, static_cast<double>(static_cast<float>(p.heading)));
  }
  EXPECT_EQ(ex.agent_past.size(), kPastSteps);
  EXPECT_EQ(ex.future_object_occupancy.size(), kHorizon);
}

TEST(Example, DownsampleAverages) {
  std::vector<float> g(16, 0.0f);
  g[0] = 1.0f;
  g[5] = 1.0f;
  const auto d = downsample(g, 4, 2);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_DOUBLE_EQ(d[0], 0.5);
  EXPECT_DOUBLE_EQ(d[3], 0.0);
}

}  // namespace
}  // namespace attnbn::scene
