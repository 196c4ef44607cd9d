#include "attnbn/scene/scene.hpp"

#include <cmath>

#include "attnbn/error.hpp"

namespace attnbn::scene {

namespace {

constexpr std::array<std::string_view, 7> kKindNames = {
    "straight", "curved_road", "stop_sign", "lead_vehicle_brake",
    "pinch_point", "crosswalk_pedestrian", "traffic_light"};

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  const auto i = static_cast<std::size_t>(kind);
  if (i >= kKindNames.size()) throw_invalid("unknown scenario kind index " + std::to_string(i));
  return kKindNames[i];
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<ScenarioKind>(i);
  }
  throw_invalid("unknown scenario kind '" + std::string(name) + "'");
}

ScenarioKind scenario_kind_from_index(std::uint32_t index) {
  if (index >= kKindNames.size()) throw_invalid("unknown scenario kind index " + std::to_string(index));
  return static_cast<ScenarioKind>(index);
}

std::string_view to_string(LightState state) {
  switch (state) {
    case LightState::kUnknown: return "unknown";
    case LightState::kRed: return "red";
    case LightState::kYellow: return "yellow";
    case LightState::kGreen: return "green";
  }
  return "unknown";
}

LightState parse_light_state(std::string_view name) {
  if (name == "red") return LightState::kRed;
  if (name == "yellow") return LightState::kYellow;
  if (name == "green") return LightState::kGreen;
  if (name == "unknown") return LightState::kUnknown;
  throw_invalid("unknown light state '" + std::string(name) + "'");
}

double light_gray_level(LightState state) {
  switch (state) {
    case LightState::kRed: return 1.0;
    case LightState::kYellow: return 0.6;
    case LightState::kGreen: return 0.2;
    case LightState::kUnknown: return 0.0;
  }
  return 0.0;
}

Vec2 GridConfig::to_pixel(Vec2 agent_m) const {
  const double mpp = meters_per_pixel();
  const Vec2 a = anchor_pixel();
  return {a.x + agent_m.x / mpp, a.y - agent_m.y / mpp};
}

Vec2 GridConfig::to_meters(Vec2 pixel) const {
  const double mpp = meters_per_pixel();
  const Vec2 a = anchor_pixel();
  return {(pixel.x - a.x) * mpp, (a.y - pixel.y) * mpp};
}

void GridConfig::validate() const {
  if (!(field_of_view_m > 0.0) || resolution <= 0) {
    throw_invalid("grid config needs positive field of view and resolution");
  }
}

const Lane* VectorScene::find_lane(int id) const {
  for (const auto& lane : lanes) {
    if (lane.id == id) return &lane;
  }
  return nullptr;
}

void validate(const VectorScene& scene) {
  auto finite_pose = [](const Pose& p) {
    return std::isfinite(p.position.x) && std::isfinite(p.position.y) && std::isfinite(p.heading);
  };
  if (scene.expert_future.size() != kHorizon) {
    throw_invalid("scene expert_future must hold " + std::to_string(kHorizon) + " poses");
  }
  for (const auto& p : scene.agent_past) {
    if (!finite_pose(p)) throw_invalid("scene agent_past has non-finite pose");
  }
  if (!finite_pose(scene.agent_pose) || !std::isfinite(scene.agent_speed) || scene.agent_speed < 0) {
    throw_invalid("scene agent state invalid");
  }
  for (const auto& p : scene.expert_future) {
    if (!finite_pose(p)) throw_invalid("scene expert_future has non-finite pose");
  }
  if (!scene.route.empty()) {
    for (const auto& p : scene.expert_future) {
      if (scene.route.distance_to(p.position) > kLaneWidth / 2) {
        throw_invalid("expert waypoint leaves the drivable region");
      }
    }
  }
  for (const auto& light : scene.traffic_lights) {
    if (!scene.find_lane(light.lane_id)) throw_invalid("traffic light references unknown lane");
  }
  for (const auto& sign : scene.stop_signs) {
    if (!scene.find_lane(sign.lane_id)) throw_invalid("stop sign references unknown lane");
  }
}

VectorScene transformed(const VectorScene& scene, const RigidTransform& t) {
  VectorScene out = scene;
  auto move_line = [&](const Polyline& line) {
    std::vector<Vec2> pts;
    pts.reserve(line.points().size());
    for (const auto& p : line.points()) pts.push_back(t.apply(p));
    return Polyline(std::move(pts));
  };
  auto move_box = [&](OrientedBox b) {
    b.pose = t.apply(b.pose);
    return b;
  };
  for (auto& lane : out.lanes) lane.centerline = move_line(lane.centerline);
  for (auto& edge : out.road_edges) edge = move_line(edge);
  for (auto& sign : out.stop_signs) sign.marker = t.apply(sign.marker);
  for (auto& cw : out.crosswalks) cw.area = move_box(cw.area);
  for (auto& obj : out.objects) {
    for (auto& b : obj.past) b = move_box(b);
    for (auto& b : obj.future) b = move_box(b);
  }
  out.route = move_line(out.route);
  for (auto& p : out.agent_past) p = t.apply(p);
  out.agent_pose = t.apply(out.agent_pose);
  for (auto& p : out.expert_future) p = t.apply(p);
  return out;
}

}  // namespace attnbn::scene
