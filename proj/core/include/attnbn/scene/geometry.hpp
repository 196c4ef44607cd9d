#pragma once

#include <cmath>
#include <vector>

namespace attnbn::scene {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Position plus heading (radians, counter-clockwise from +x).
struct Pose {
  Vec2 position;
  double heading = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct OrientedBox {
  Pose pose;  // box center and the direction of its length axis
  double length = 0.0;
  double width = 0.0;
};

double wrap_angle(double a);

/// Rigid transform applied to a point/pose: rotate by `rotation` about the
/// origin, then translate.
struct RigidTransform {
  double rotation = 0.0;
  Vec2 translation;

  Vec2 apply(Vec2 p) const;
  Pose apply(const Pose& p) const;
};

/// World -> agent frame. Agent frame: +y forward, +x to the agent's right,
/// headings counter-clockwise from +x like any other frame, so straight ahead
/// is pi/2.
class AgentFrame {
 public:
  explicit AgentFrame(const Pose& agent);

  Vec2 to_agent(Vec2 world) const;
  Pose to_agent(const Pose& world) const;
  Vec2 to_world(Vec2 agent) const;
  Pose to_world(const Pose& agent) const;

 private:
  Pose agent_;
  double c_, s_;
};

/// Polyline with cumulative arc length, queried by distance along it.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  bool empty() const { return points_.size() < 2; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  /// Arc length of vertex i.
  double station(std::size_t i) const { return cumulative_[i]; }
  /// Interpolated pose at arc length s (clamped to the ends).
  Pose pose_at(double s) const;
  /// Arc length of the closest point on the polyline.
  double project(Vec2 p) const;
  double distance_to(Vec2 p) const;

 private:
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);
bool point_in_box(Vec2 p, const OrientedBox& box);
/// Distance from p to the box (zero inside).
double distance_to_box(Vec2 p, const OrientedBox& box);
/// Separating-axis overlap test.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

}  // namespace attnbn::scene
