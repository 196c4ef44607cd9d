#include "attnbn/scene/raster.hpp"

#include <algorithm>
#include <cmath>

#include "attnbn/error.hpp"
#include "attnbn/numerics/parameters.hpp"

namespace attnbn::scene {

const std::vector<std::string>& channel_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"roadmap_lanes", "roadmap_stop_signs", "roadmap_crosswalks",
                                  "speed_limit",   "past_agent_poses",   "current_agent_box",
                                  "route"};
    for (int t = 4; t >= 0; --t) n.push_back("traffic_lights_t-" + std::to_string(t));
    for (int t = 4; t >= 0; --t) n.push_back("dynamic_objects_t-" + std::to_string(t));
    return n;
  }();
  return names;
}

const std::vector<std::string>& dense_channel_names() {
  static const std::vector<std::string> names = {"roadmap_lanes", "speed_limit", "past_agent_poses",
                                                  "current_agent_box", "route"};
  return names;
}

const std::vector<std::string>& object_channel_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (int t = 4; t >= 0; --t) n.push_back("dynamic_objects_t-" + std::to_string(t));
    return n;
  }();
  return names;
}

std::size_t RasterStack::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw_invalid("raster has no channel '" + std::string(name) + "'");
}

std::span<const float> RasterStack::channel(std::string_view name) const {
  return channels[index_of(name)];
}

std::vector<std::size_t> RasterStack::indices_of(std::span<const std::string> subset) const {
  std::vector<std::size_t> out;
  out.reserve(subset.size());
  for (const auto& n : subset) out.push_back(index_of(n));
  return out;
}

namespace {

class Canvas {
 public:
  Canvas(const GridConfig& grid, Grid& target) : grid_(grid), target_(target) {}

  // Visits pixels whose centers lie inside the agent-frame bounding box.
  template <typename Fn>
  void for_pixels(Vec2 lo_m, Vec2 hi_m, Fn&& fn) {
    const int n = grid_.resolution;
    const Vec2 a = grid_.to_pixel({lo_m.x, hi_m.y});
    const Vec2 b = grid_.to_pixel({hi_m.x, lo_m.y});
    const int c0 = std::max(0, static_cast<int>(std::floor(a.x - 0.5)));
    const int c1 = std::min(n - 1, static_cast<int>(std::ceil(b.x)));
    const int r0 = std::max(0, static_cast<int>(std::floor(a.y - 0.5)));
    const int r1 = std::min(n - 1, static_cast<int>(std::ceil(b.y)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const Vec2 center = grid_.to_meters({c + 0.5, r + 0.5});
        fn(r * n + c, center);
      }
    }
  }

  void paint(int index, double value) {
    target_[index] = std::max(target_[index], static_cast<float>(value));
  }

  void box(const OrientedBox& b, double value) {
    const double reach = 0.5 * std::hypot(b.length, b.width);
    const Vec2 p = b.pose.position;
    for_pixels({p.x - reach, p.y - reach}, {p.x + reach, p.y + reach}, [&](int idx, Vec2 m) {
      if (point_in_box(m, b)) paint(idx, value);
    });
  }

  void disc(Vec2 center, double radius, double value) {
    for_pixels({center.x - radius, center.y - radius}, {center.x + radius, center.y + radius},
               [&](int idx, Vec2 m) {
                 if (norm(m - center) <= radius) paint(idx, value);
               });
  }

  void segment(Vec2 a, Vec2 b, double half_width, double value) {
    const Vec2 lo{std::min(a.x, b.x) - half_width, std::min(a.y, b.y) - half_width};
    const Vec2 hi{std::max(a.x, b.x) + half_width, std::max(a.y, b.y) + half_width};
    if (!visible(lo, hi)) return;
    for_pixels(lo, hi, [&](int idx, Vec2 m) {
      if (distance_to_segment(m, a, b) <= half_width) paint(idx, value);
    });
  }

  void polyline(const std::vector<Vec2>& pts, double half_width, double value) {
    for (std::size_t i = 1; i < pts.size(); ++i) segment(pts[i - 1], pts[i], half_width, value);
  }

 private:
  bool visible(Vec2 lo, Vec2 hi) const {
    const double half = grid_.field_of_view_m;  // generous bound in meters
    return hi.x >= -half && lo.x <= half && hi.y >= -half && lo.y <= half;
  }

  const GridConfig& grid_;
  Grid& target_;
};

std::vector<Vec2> to_agent(const AgentFrame& frame, const Polyline& line) {
  std::vector<Vec2> out;
  out.reserve(line.points().size());
  for (const auto& p : line.points()) out.push_back(frame.to_agent(p));
  return out;
}

OrientedBox to_agent(const AgentFrame& frame, const OrientedBox& box) {
  return {frame.to_agent(box.pose), box.length, box.width};
}

// Sub-polyline of `line` between two stations, in agent frame.
std::vector<Vec2> lane_span(const AgentFrame& frame, const Polyline& line, double from, double to) {
  std::vector<Vec2> out;
  out.push_back(frame.to_agent(line.pose_at(from).position));
  for (std::size_t i = 0; i < line.points().size(); ++i) {
    if (line.station(i) > from && line.station(i) < to) out.push_back(frame.to_agent(line.points()[i]));
  }
  out.push_back(frame.to_agent(line.pose_at(to).position));
  return out;
}

void stop_line(Canvas& canvas, const AgentFrame& frame, const Polyline& lane, double station, double value) {
  const Pose p = lane.pose_at(station);
  const Vec2 left{-std::sin(p.heading), std::cos(p.heading)};
  const Vec2 a = frame.to_agent(p.position + left * (kLaneWidth / 2));
  const Vec2 b = frame.to_agent(p.position - left * (kLaneWidth / 2));
  canvas.segment(a, b, 0.15, value);
}

constexpr double kLineHalfWidth = 0.2;
constexpr double kLightSpan = 8.0;  // lane length colored by a light's state

}  // namespace

RasterStack rasterize(const VectorScene& scene, const GridConfig& grid) {
  grid.validate();
  const auto& names = channel_names();
  RasterStack out;
  out.resolution = grid.resolution;
  out.names = names;
  out.dense_subset_names = dense_channel_names();
  const std::size_t pixels = static_cast<std::size_t>(grid.resolution) * grid.resolution;
  out.channels.assign(names.size(), Grid(pixels, 0.0f));
  auto canvas = [&](std::string_view name) { return Canvas(grid, out.channels[out.index_of(name)]); };

  const AgentFrame frame(scene.agent_pose);

  {
    auto lanes = canvas("roadmap_lanes");
    for (const auto& lane : scene.lanes) lanes.polyline(to_agent(frame, lane.centerline), kLineHalfWidth, 1.0);
    for (const auto& edge : scene.road_edges) lanes.polyline(to_agent(frame, edge), kLineHalfWidth, 0.5);
    for (const auto& light : scene.traffic_lights) {
      if (const Lane* lane = scene.find_lane(light.lane_id)) {
        stop_line(lanes, frame, lane->centerline, light.station, 0.75);
      }
    }
  }
  {
    auto signs = canvas("roadmap_stop_signs");
    for (const auto& sign : scene.stop_signs) {
      if (const Lane* lane = scene.find_lane(sign.lane_id)) {
        stop_line(signs, frame, lane->centerline, sign.station, 1.0);
      }
      signs.disc(frame.to_agent(sign.marker), 0.5, 1.0);
    }
  }
  {
    auto crosswalks = canvas("roadmap_crosswalks");
    for (const auto& cw : scene.crosswalks) crosswalks.box(to_agent(frame, cw.area), 1.0);
  }
  {
    auto speed = canvas("speed_limit");
    for (const auto& lane : scene.lanes) {
      speed.polyline(to_agent(frame, lane.centerline), kLineHalfWidth,
                     std::clamp(lane.speed_limit / kSpeedNormalizer, 0.0, 1.0));
    }
  }
  {
    auto past = canvas("past_agent_poses");
    for (const auto& p : scene.agent_past) past.disc(frame.to_agent(p.position), 0.3, 1.0);
  }
  canvas("current_agent_box").box(to_agent(frame, scene.agent_box()), 1.0);
  if (!scene.route.empty()) canvas("route").polyline(to_agent(frame, scene.route), 0.5, 1.0);

  for (std::size_t t = 0; t < kPastSteps; ++t) {
    auto lights = canvas("traffic_lights_t-" + std::to_string(kPastSteps - 1 - t));
    for (const auto& light : scene.traffic_lights) {
      const Lane* lane = scene.find_lane(light.lane_id);
      const double level = light_gray_level(light.states[t]);
      if (!lane || level <= 0.0) continue;
      lights.polyline(lane_span(frame, lane->centerline, light.station - kLightSpan, light.station),
                      kLineHalfWidth, level);
    }
    auto objects = canvas("dynamic_objects_t-" + std::to_string(kPastSteps - 1 - t));
    for (const auto& obj : scene.objects) objects.box(to_agent(frame, obj.past[t]), 1.0);
  }
  return out;
}

Grid render_box(const GridConfig& grid, const OrientedBox& agent_frame_box) {
  Grid out(static_cast<std::size_t>(grid.resolution) * grid.resolution, 0.0f);
  Canvas(grid, out).box(agent_frame_box, 1.0);
  return out;
}

Grid render_future_objects(const VectorScene& scene, const GridConfig& grid, std::size_t k) {
  Grid out(static_cast<std::size_t>(grid.resolution) * grid.resolution, 0.0f);
  Canvas canvas(grid, out);
  const AgentFrame frame(scene.agent_pose);
  for (const auto& obj : scene.objects) canvas.box(to_agent(frame, obj.future.at(k)), 1.0);
  return out;
}

namespace {

Pose rounded(const Pose& p) {
  return {{num::round_to_f32(p.position.x), num::round_to_f32(p.position.y)}, num::round_to_f32(p.heading)};
}

}  // namespace

Example make_example(const VectorScene& scene, const GridConfig& grid) {
  Example ex;
  ex.raster = rasterize(scene, grid);
  const AgentFrame frame(scene.agent_pose);
  for (const auto& p : scene.expert_future) ex.expert_future.push_back(rounded(frame.to_agent(p)));
  for (const auto& p : scene.agent_past) ex.agent_past.push_back(rounded(frame.to_agent(p)));
  for (std::size_t k = 0; k < kHorizon; ++k) ex.future_object_occupancy.push_back(render_future_objects(scene, grid, k));
  ex.kind = scene.kind;
  ex.seed = scene.seed;
  return ex;
}

std::vector<Vec2> waypoints_in_pixels(const Example& example, const GridConfig& grid) {
  std::vector<Vec2> out;
  for (const auto& p : example.expert_future) out.push_back(grid.to_pixel(p.position));
  return out;
}

std::vector<double> downsample(std::span<const float> grid, int resolution, int factor) {
  if (factor <= 0 || resolution % factor != 0) throw_invalid("downsample: factor must divide resolution");
  if (grid.size() != static_cast<std::size_t>(resolution) * resolution) throw_invalid("downsample: grid size");
  const int n = resolution / factor;
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  const double inv = 1.0 / (factor * factor);
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      out[(r / factor) * n + c / factor] += grid[r * resolution + c] * inv;
    }
  }
  return out;
}

}  // namespace attnbn::scene
