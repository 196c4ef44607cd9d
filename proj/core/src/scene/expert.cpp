#include "attnbn/scene/expert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "attnbn/error.hpp"

namespace attnbn::scene {

namespace {

struct LeadTrack {
  // Station of the lead's center at t = j dt, j = 0 .. K.
  std::array<double, kHorizon + 1> station{};
  double gap = 0.0;
};

struct SlowZone {
  double begin = 0.0;
  double end = 0.0;
  double cap = 0.0;
};

bool pedestrian_on(const VectorScene& scene, const Crosswalk& cw) {
  for (const auto& obj : scene.objects) {
    if (obj.type != ObjectType::kPedestrian) continue;
    const auto& box = obj.current();
    if (point_in_box(box.pose.position, cw.area) ||
        distance_to_box(box.pose.position, cw.area) < 0.5 * box.width) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<Pose> expert_policy(const VectorScene& scene) {
  if (scene.route.empty()) throw_invalid("expert_policy: scene has no route");
  const Lane* lane = scene.find_lane(scene.route_lane_id);
  if (!lane) throw_invalid("expert_policy: route lane missing");
  const double limit = lane->speed_limit;
  const double dt = kStepSeconds;
  const double a = kComfortDecel;
  const double half_len = scene.agent_length / 2;
  const double s0 = scene.route.project(scene.agent_pose.position);

  if (s0 + limit * dt * kHorizon > scene.route.length()) {
    throw Error(ErrorCode::kScenarioGeneration, "route shorter than the planning horizon");
  }

  std::vector<double> stops;
  auto add_stop = [&](double line_station) {
    if (line_station >= s0 + half_len) stops.push_back(line_station - kStopMargin - half_len);
  };
  for (const auto& sign : scene.stop_signs) {
    if (sign.lane_id == scene.route_lane_id) add_stop(sign.station);
  }
  for (const auto& light : scene.traffic_lights) {
    const auto current = light.states.back();
    if (light.lane_id == scene.route_lane_id &&
        (current == LightState::kRed || current == LightState::kYellow)) {
      add_stop(light.station);
    }
  }
  for (const auto& cw : scene.crosswalks) {
    if (cw.lane_id == scene.route_lane_id && pedestrian_on(scene, cw)) add_stop(cw.station);
  }

  std::vector<LeadTrack> leads;
  std::vector<SlowZone> zones;
  for (const auto& obj : scene.objects) {
    if (obj.type != ObjectType::kVehicle) continue;
    const auto& box = obj.current();
    const double lateral = scene.route.distance_to(box.pose.position);
    const double station = scene.route.project(box.pose.position);
    if (obj.parked) {
      if (lateral < kLaneWidth / 2 + 2.0 && station + box.length / 2 > s0) {
        zones.push_back({station - box.length / 2 - half_len - 3.0, station + box.length / 2 + half_len,
                         0.6 * limit});
      }
      continue;
    }
    if (lateral < kLaneWidth / 2 && station > s0) {
      LeadTrack track;
      track.gap = box.length / 2 + half_len + kStopMargin;
      track.station[0] = station;
      for (std::size_t k = 0; k < kHorizon; ++k) {
        track.station[k + 1] = scene.route.project(obj.future[k].pose.position);
      }
      leads.push_back(track);
    }
  }

  std::vector<Pose> out;
  out.reserve(kHorizon);
  double s = s0;
  double v = scene.agent_speed;
  for (std::size_t k = 0; k < kHorizon; ++k) {
    double vmax = std::min(limit, v + a * dt);
    double max_step = std::numeric_limits<double>::infinity();
    auto limit_to = [&](double distance) {
      const double d = std::max(distance, 0.0);
      vmax = std::min(vmax, std::sqrt(2.0 * a * d));
      max_step = std::min(max_step, d);
    };
    for (double stop : stops) limit_to(stop - s);
    for (const auto& lead : leads) limit_to(lead.station[k] - lead.gap - s);
    for (const auto& zone : zones) {
      if (s < zone.begin) {
        vmax = std::min(vmax, std::sqrt(zone.cap * zone.cap + 2.0 * a * (zone.begin - s)));
      } else if (s <= zone.end) {
        vmax = std::min(vmax, zone.cap);
      }
    }
    const double step = std::min(vmax * dt, max_step);
    s += step;
    v = step / dt;
    out.push_back(scene.route.pose_at(s));
  }
  return out;
}

}  // namespace attnbn::scene
