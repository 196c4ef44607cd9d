#include <gtest/gtest.h>

#include "attnbn/error.hpp"
#include "attnbn/scene/expert.hpp"
#include "attnbn/scene/generator.hpp"

namespace attnbn::scene {
namespace {

std::vector<double> speeds(const VectorScene& s) {
  std::vector<double> v;
  Vec2 prev = s.agent_pose.position;
  for (const auto& p : s.expert_future) {
    v.push_back(norm(p.position - prev) / kStepSeconds);
    prev = p.position;
  }
  return v;
}

TEST(Expert, EmptyRoadKeepsTheLimit) {
  const VectorScene s = straight_road_scene(4.0, 4.0);
  for (std::size_t k = 0; k < kHorizon; ++k) {
    EXPECT_NEAR(s.expert_future[k].position.x, 4.0 * kStepSeconds * static_cast<double>(k + 1), 1e-9);
    EXPECT_NEAR(s.expert_future[k].position.y, 0.0, 1e-12);
  }
}

TEST(Expert, AcceleratesTowardTheLimitAtTheCap) {
  const VectorScene s = straight_road_scene(5.0, 3.0);
  const auto v = speeds(s);
  EXPECT_NEAR(v[0], 3.0 + kComfortDecel * kStepSeconds, 1e-9);
  EXPECT_NEAR(v.back(), 5.0, 1e-9);
}

TEST(Expert, StopSignFiveMetersAhead) {
  VectorScene s = straight_road_scene(5.0, 5.0);
  const double agent_station = s.route.project(s.agent_pose.position);
  s.stop_signs.push_back({10, s.route_lane_id, agent_station + 5.0, {0.0, -2.5}});
  refresh_expert(s);
  const auto v = speeds(s);
  for (std::size_t k = 1; k < v.size(); ++k) EXPECT_LE(v[k], v[k - 1] + 1e-12);
  // Front bumper stops kStopMargin short of the line.
  const double stop_x = agent_station + 5.0 - kStopMargin - s.agent_length / 2 - 20.0;
  EXPECT_NEAR(s.expert_future.back().position.x, stop_x, 1e-9);
  EXPECT_NEAR(s.expert_future[kHorizon - 2].position.x, stop_x, 0.05);
  for (const auto& p : s.expert_future) EXPECT_LE(p.position.x, stop_x + 1e-9);
}

TEST(Expert, GreenLightMatchesEmptyRoad) {
  VectorScene s = straight_road_scene(4.5, 4.0);
  const auto baseline = s.expert_future;
  TrafficLight light;
  light.id = 30;
  light.lane_id = s.route_lane_id;
  light.station = s.route.project(s.agent_pose.position) + 6.0;
  light.states.fill(LightState::kGreen);
  s.traffic_lights.push_back(light);
  refresh_expert(s);
  EXPECT_EQ(s.expert_future, baseline);
}

TEST(Expert, RedLightStops) {
  VectorScene s = straight_road_scene(4.5, 4.0);
  TrafficLight light;
  light.id = 30;
  light.lane_id = s.route_lane_id;
  light.station = s.route.project(s.agent_pose.position) + 8.0;
  light.states.fill(LightState::kRed);
  s.traffic_lights.push_back(light);
  refresh_expert(s);
  EXPECT_LT(speeds(s).back(), 0.5);
}

TEST(Expert, NeverOverlapsOtherAgents) {
  for (auto kind : {ScenarioKind::kLeadVehicleBrake, ScenarioKind::kPinchPoint, ScenarioKind::kCrosswalkPedestrian}) {
    for (std::uint64_t seed = 0; seed < 80; ++seed) {
      const VectorScene s = generate_scenario(kind, seed);
      for (std::size_t k = 0; k < kHorizon; ++k) {
        const OrientedBox agent{s.expert_future[k], s.agent_length, s.agent_width};
        for (const auto& obj : s.objects) {
          EXPECT_FALSE(boxes_overlap(agent, obj.future[k])) << to_string(kind) << " seed " << seed << " k " << k;
        }
      }
    }
  }
}

TEST(Expert, ShortRouteIsAGenerationError) {
  VectorScene s = straight_road_scene(5.0, 5.0);
  s.route = Polyline({{-20.0, 0.0}, {2.0, 0.0}});
  try {
    (void)expert_policy(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScenarioGeneration);
  }
}

}  // namespace
}  // namespace attnbn::scene
