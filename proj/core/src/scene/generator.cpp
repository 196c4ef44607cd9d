#include "attnbn/scene/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "attnbn/error.hpp"
#include "attnbn/numerics/random.hpp"
#include "attnbn/scene/expert.hpp"

namespace attnbn::scene {

namespace {

using num::Rng;

constexpr double kBehind = 20.0;       // lane length behind the agent
constexpr double kLaneLength = 60.0;
constexpr double kSpacing = 0.25;
constexpr int kEgoLane = 1;
constexpr int kOncomingLane = 2;

// Centerline starting kBehind meters behind the local origin, heading +x,
// straight until `curve_start` (station) then constant curvature.
Polyline build_centerline(double curve_start, double curvature) {
  std::vector<Vec2> pts;
  Vec2 p{-kBehind, 0.0};
  double heading = 0.0;
  pts.push_back(p);
  for (double s = kSpacing; s <= kLaneLength + 1e-9; s += kSpacing) {
    const double k = s > curve_start ? curvature : 0.0;
    const double mid = heading + 0.5 * k * kSpacing;
    p = p + Vec2{std::cos(mid), std::sin(mid)} * kSpacing;
    heading += k * kSpacing;
    pts.push_back(p);
  }
  return Polyline(std::move(pts));
}

// Lateral offset (positive = left of travel direction).
Polyline offset_line(const Polyline& line, double offset, bool reverse) {
  std::vector<Vec2> pts;
  const auto& src = line.points();
  pts.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Pose pose = line.pose_at(line.station(i));
    const Vec2 left{-std::sin(pose.heading), std::cos(pose.heading)};
    pts.push_back(src[i] + left * offset);
  }
  if (reverse) std::reverse(pts.begin(), pts.end());
  return Polyline(std::move(pts));
}

Vec2 lateral_point(const Polyline& line, double station, double offset) {
  const Pose pose = line.pose_at(station);
  const Vec2 left{-std::sin(pose.heading), std::cos(pose.heading)};
  return pose.position + left * offset;
}

struct Builder {
  VectorScene scene;
  Rng rng;
  double agent_station = kBehind;

  Builder(ScenarioKind kind, std::uint64_t seed)
      : rng(num::mix_seed(seed, static_cast<std::uint64_t>(kind) + 101)) {
    scene.kind = kind;
    scene.seed = seed;
  }

  const Polyline& ego() const { return scene.lanes.front().centerline; }
  double limit() const { return scene.lanes.front().speed_limit; }

  void road(double speed_limit, double curve_start, double curvature) {
    Lane ego_lane{kEgoLane, build_centerline(kBehind + curve_start, curvature), speed_limit};
    Lane oncoming{kOncomingLane, offset_line(ego_lane.centerline, kLaneWidth, true), speed_limit};
    scene.road_edges.push_back(offset_line(ego_lane.centerline, -kLaneWidth / 2, false));
    scene.road_edges.push_back(offset_line(ego_lane.centerline, 1.5 * kLaneWidth, false));
    scene.route = ego_lane.centerline;
    scene.route_lane_id = kEgoLane;
    scene.lanes.push_back(std::move(ego_lane));
    scene.lanes.push_back(std::move(oncoming));
  }

  void agent(double speed) {
    scene.agent_speed = speed;
    scene.agent_pose = ego().pose_at(agent_station);
    for (std::size_t i = 0; i < kPastSteps; ++i) {
      const double back = static_cast<double>(kPastSteps - i) * kStepSeconds * speed;
      scene.agent_past[i] = ego().pose_at(agent_station - back);
    }
  }

  // Stop line distance ahead of the agent center that can be reached at
  // comfortable deceleration.
  double reachable_distance(double speed) {
    const double needed = speed * speed / (2 * kComfortDecel) + kStopMargin + scene.agent_length / 2 + 0.5;
    const double lo = std::max(4.5, needed);
    return rng.uniform(lo, std::max(lo, 11.5));
  }

  OrientedBox box_on_lane(double station, double offset, double length, double width) {
    const Pose pose = ego().pose_at(station);
    return {{lateral_point(ego(), station, offset), pose.heading}, length, width};
  }

  int next_id() { return 100 + static_cast<int>(scene.objects.size()); }
};

double initial_speed(Rng& rng, double limit) { return limit * rng.uniform(0.6, 1.0); }

// Distance covered from t = 0 to t for a vehicle at speed u0 that starts braking
// at t_brake with deceleration b (never reverses). Negative t extrapolates backwards
// at the pre-braking speed when t < t_brake.
double braking_distance(double u0, double t_brake, double b, double t) {
  auto position = [&](double tt) {
    if (tt <= t_brake) return u0 * tt;
    const double stop_t = t_brake + u0 / b;
    const double te = std::min(tt, stop_t);
    const double dt = te - t_brake;
    return u0 * t_brake + u0 * dt - 0.5 * b * dt * dt;
  };
  return position(t) - position(0.0);
}

void make_straight(Builder& b) {
  b.road(b.rng.uniform(3.0, 5.0), 0.0, 0.0);
  b.agent(b.limit());
}

void make_curved(Builder& b) {
  const double limit = b.rng.uniform(3.0, 5.0);
  const double sign = b.rng.bernoulli(0.5) ? 1.0 : -1.0;
  b.road(limit, b.rng.uniform(0.0, 4.0), sign * b.rng.uniform(0.03, 0.10));
  b.agent(initial_speed(b.rng, limit));
}

void make_stop_sign(Builder& b) {
  const double limit = b.rng.uniform(3.0, 5.0);
  b.road(limit, 0.0, 0.0);
  b.agent(initial_speed(b.rng, limit));
  const double ahead = b.reachable_distance(b.scene.agent_speed);
  const double station = b.agent_station + ahead;
  StopSign sign{10, kEgoLane, station, lateral_point(b.ego(), station, -(kLaneWidth / 2 + 0.8))};
  b.scene.stop_signs.push_back(sign);
}

void make_lead_vehicle(Builder& b) {
  const double limit = b.rng.uniform(3.0, 5.0);
  b.road(limit, 0.0, 0.0);
  b.agent(initial_speed(b.rng, limit));
  const double gap = b.rng.uniform(7.0, 10.0);
  const double u0 = b.scene.agent_speed * b.rng.uniform(0.7, 1.0);
  const double t_brake = b.rng.uniform(-0.8, 0.4);
  const double decel = b.rng.uniform(1.5, 3.0);
  DynamicObject lead;
  lead.id = b.next_id();
  lead.type = ObjectType::kVehicle;
  auto at = [&](double t) {
    return b.box_on_lane(b.agent_station + gap + braking_distance(u0, t_brake, decel, t), 0.0, 4.0, 1.8);
  };
  for (std::size_t i = 0; i < kPastSteps; ++i) {
    lead.past[i] = at(-static_cast<double>(kPastSteps - 1 - i) * kStepSeconds);
  }
  for (std::size_t k = 0; k < kHorizon; ++k) lead.future[k] = at(static_cast<double>(k + 1) * kStepSeconds);
  b.scene.objects.push_back(lead);
}

void add_parked(Builder& b, double station, double offset) {
  DynamicObject car;
  car.id = b.next_id();
  car.type = ObjectType::kVehicle;
  car.parked = true;
  const OrientedBox box = b.box_on_lane(station, offset, 4.0, 1.8);
  car.past.fill(box);
  car.future.fill(box);
  b.scene.objects.push_back(car);
}

void make_pinch(Builder& b) {
  const double limit = b.rng.uniform(3.0, 5.0);
  b.road(limit, 0.0, 0.0);
  b.agent(initial_speed(b.rng, limit));
  const double clearance = b.scene.agent_width / 2 + 0.9;
  const double right_station = b.agent_station + b.rng.uniform(4.5, 9.0);
  add_parked(b, right_station, -(clearance + b.rng.uniform(0.3, 0.8)));
  if (b.rng.bernoulli(0.7)) {
    const double left_station = right_station + b.rng.uniform(-3.0, 3.0);
    add_parked(b, left_station, clearance + b.rng.uniform(0.3, 0.8));
  }
}

void make_crosswalk(Builder& b) {
  const double limit = b.rng.uniform(3.0, 5.0);
  b.road(limit, 0.0, 0.0);
  b.agent(initial_speed(b.rng, limit));
  const double ahead = b.reachable_distance(b.scene.agent_speed);
  const double station = b.agent_station + ahead;
  const double depth = 3.0;
  Crosswalk cw;
  cw.id = 20;
  cw.lane_id = kEgoLane;
  cw.station = station;
  // Spans both lanes; its length axis runs across the road.
  const Pose mid = b.ego().pose_at(station + depth / 2);
  cw.area = {{lateral_point(b.ego(), station + depth / 2, kLaneWidth / 2), mid.heading + std::numbers::pi / 2},
             2 * kLaneWidth + 1.0, depth};
  b.scene.crosswalks.push_back(cw);

  DynamicObject ped;
  ped.id = b.next_id();
  ped.type = ObjectType::kPedestrian;
  const double walk = b.rng.bernoulli(0.5) ? 1.0 : -1.0;
  const double lateral0 = b.rng.uniform(-1.5, 3.0);
  const double along = station + b.rng.uniform(0.8, depth - 0.8);
  auto at = [&](double t) {
    const double lat = std::clamp(lateral0 + walk * 1.0 * t, -kLaneWidth / 2 - 0.5, 1.5 * kLaneWidth + 0.5);
    return b.box_on_lane(along, lat, 0.6, 0.6);
  };
  for (std::size_t i = 0; i < kPastSteps; ++i) {
    ped.past[i] = at(-static_cast<double>(kPastSteps - 1 - i) * kStepSeconds);
  }
  for (std::size_t k = 0; k < kHorizon; ++k) ped.future[k] = at(static_cast<double>(k + 1) * kStepSeconds);
  b.scene.objects.push_back(ped);
}

void make_traffic_light(Builder& b) {
  const double limit = b.rng.uniform(3.0, 5.0);
  b.road(limit, 0.0, 0.0);
  b.agent(initial_speed(b.rng, limit));
  const double ahead = b.reachable_distance(b.scene.agent_speed);
  TrafficLight light;
  light.id = 30;
  light.lane_id = kEgoLane;
  light.station = b.agent_station + ahead;
  const double r = b.rng.uniform();
  using LS = LightState;
  if (r < 0.35) {
    light.states.fill(LS::kRed);
  } else if (r < 0.5) {
    light.states = {LS::kGreen, LS::kGreen, LS::kGreen, LS::kYellow, LS::kYellow};
  } else if (r < 0.85) {
    light.states.fill(LS::kGreen);
  } else {
    light.states = {LS::kRed, LS::kRed, LS::kRed, LS::kGreen, LS::kGreen};
  }
  b.scene.traffic_lights.push_back(light);
}

RigidTransform world_placement(Rng& rng) {
  return {rng.uniform(-std::numbers::pi, std::numbers::pi), {rng.uniform(-100, 100), rng.uniform(-100, 100)}};
}

}  // namespace

VectorScene generate_scenario(ScenarioKind kind, std::uint64_t seed) {
  Builder b(kind, seed);
  switch (kind) {
    case ScenarioKind::kStraight: make_straight(b); break;
    case ScenarioKind::kCurvedRoad: make_curved(b); break;
    case ScenarioKind::kStopSign: make_stop_sign(b); break;
    case ScenarioKind::kLeadVehicleBrake: make_lead_vehicle(b); break;
    case ScenarioKind::kPinchPoint: make_pinch(b); break;
    case ScenarioKind::kCrosswalkPedestrian: make_crosswalk(b); break;
    case ScenarioKind::kTrafficLight: make_traffic_light(b); break;
    default: throw_invalid("unknown scenario kind");
  }
  VectorScene scene = transformed(b.scene, world_placement(b.rng));
  refresh_expert(scene);
  return scene;
}

VectorScene straight_road_scene(double speed_limit, double agent_speed) {
  Builder b(ScenarioKind::kStraight, 0);
  b.road(speed_limit, 0.0, 0.0);
  b.agent(agent_speed);
  refresh_expert(b.scene);
  return b.scene;
}

void refresh_expert(VectorScene& scene) {
  scene.expert_future = expert_policy(scene);
  validate(scene);
}

}  // namespace attnbn::scene
