#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "attnbn/scene/geometry.hpp"

namespace attnbn::scene {

inline constexpr std::size_t kPastSteps = 5;
inline constexpr std::size_t kHorizon = 10;
inline constexpr double kStepSeconds = 0.2;
inline constexpr double kComfortDecel = 2.0;   // m/s^2, also used as max acceleration
inline constexpr double kStopMargin = 1.0;     // m between bumper and stop line / object
inline constexpr double kLaneWidth = 3.5;
inline constexpr double kSpeedNormalizer = 10.0;  // speed_limit channel = limit / this
inline constexpr double kAgentLength = 4.0;
inline constexpr double kAgentWidth = 1.8;

enum class ScenarioKind : std::uint32_t {
  kStraight = 0,
  kCurvedRoad,
  kStopSign,
  kLeadVehicleBrake,
  kPinchPoint,
  kCrosswalkPedestrian,
  kTrafficLight,
};

inline constexpr std::array<ScenarioKind, 7> kAllScenarioKinds = {
    ScenarioKind::kStraight,         ScenarioKind::kCurvedRoad,  ScenarioKind::kStopSign,
    ScenarioKind::kLeadVehicleBrake, ScenarioKind::kPinchPoint,  ScenarioKind::kCrosswalkPedestrian,
    ScenarioKind::kTrafficLight};

std::string_view to_string(ScenarioKind kind);
/// Throws kInvalidArgument for unknown names.
ScenarioKind parse_scenario_kind(std::string_view name);
ScenarioKind scenario_kind_from_index(std::uint32_t index);

enum class LightState : std::uint8_t { kUnknown = 0, kRed, kYellow, kGreen };

std::string_view to_string(LightState state);
LightState parse_light_state(std::string_view name);
/// Rendered brightness: red brightest, green darkest, unknown not drawn.
double light_gray_level(LightState state);

/// Square top-down grid fixed to the agent. The agent's current position maps
/// to the anchor point (0.5 W, 0.75 H) in continuous pixel coordinates, facing up.
struct GridConfig {
  double field_of_view_m = 16.0;
  int resolution = 64;

  double meters_per_pixel() const { return field_of_view_m / resolution; }
  Vec2 anchor_pixel() const { return {0.5 * resolution, 0.75 * resolution}; }
  /// Agent-frame meters -> continuous pixel coordinates (x = column, y = row).
  Vec2 to_pixel(Vec2 agent_m) const;
  Vec2 to_meters(Vec2 pixel) const;
  void validate() const;
};

struct Lane {
  int id = 0;
  Polyline centerline;
  double speed_limit = 0.0;  // m/s
};

struct StopSign {
  int id = 0;
  int lane_id = 0;
  double station = 0.0;  // stop line position along the lane
  Vec2 marker;           // roadside sign position
};

struct Crosswalk {
  int id = 0;
  int lane_id = 0;
  double station = 0.0;  // near edge along the lane
  OrientedBox area;
};

struct TrafficLight {
  int id = 0;
  int lane_id = 0;
  double station = 0.0;                        // stop line position along the lane
  std::array<LightState, kPastSteps> states{};  // oldest first, last = current
};

enum class ObjectType : std::uint8_t { kVehicle = 0, kPedestrian };

struct DynamicObject {
  int id = 0;
  ObjectType type = ObjectType::kVehicle;
  std::array<OrientedBox, kPastSteps> past{};   // t = -4 dt .. 0
  std::array<OrientedBox, kHorizon> future{};   // t = 1 dt .. K dt
  bool parked = false;

  const OrientedBox& current() const { return past.back(); }
};

/// Symbolic scene in a world frame.
struct VectorScene {
  ScenarioKind kind = ScenarioKind::kStraight;
  std::uint64_t seed = 0;

  std::vector<Lane> lanes;
  std::vector<Polyline> road_edges;
  std::vector<StopSign> stop_signs;
  std::vector<Crosswalk> crosswalks;
  std::vector<TrafficLight> traffic_lights;
  std::vector<DynamicObject> objects;

  Polyline route;
  int route_lane_id = 0;

  std::array<Pose, kPastSteps> agent_past{};  // t = -5 dt .. -1 dt
  Pose agent_pose;
  double agent_speed = 0.0;
  double agent_length = kAgentLength;
  double agent_width = kAgentWidth;

  std::vector<Pose> expert_future;  // K poses, t = 1 dt .. K dt

  const Lane* find_lane(int id) const;
  OrientedBox agent_box() const { return {agent_pose, agent_length, agent_width}; }
};

/// Checks structural invariants (sequence lengths, finite values, expert on road).
/// Throws kInvalidArgument naming the violated invariant.
void validate(const VectorScene& scene);

/// Applies a rigid transform to all scene content and the agent.
VectorScene transformed(const VectorScene& scene, const RigidTransform& t);

}  // namespace attnbn::scene
