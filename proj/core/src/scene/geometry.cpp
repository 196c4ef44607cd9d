#include "attnbn/scene/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>

#include "attnbn/error.hpp"

namespace attnbn::scene {

namespace {
constexpr double kHalfPi = 0.5 * std::numbers::pi;
}  // namespace

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0) a += two_pi;
  return a - std::numbers::pi;
}

Vec2 RigidTransform::apply(Vec2 p) const {
  const double c = std::cos(rotation), s = std::sin(rotation);
  return {c * p.x - s * p.y + translation.x, s * p.x + c * p.y + translation.y};
}

Pose RigidTransform::apply(const Pose& p) const {
  return {apply(p.position), wrap_angle(p.heading + rotation)};
}

AgentFrame::AgentFrame(const Pose& agent)
    : agent_(agent), c_(std::cos(agent.heading)), s_(std::sin(agent.heading)) {}

Vec2 AgentFrame::to_agent(Vec2 world) const {
  const Vec2 d = world - agent_.position;
  const double forward = d.x * c_ + d.y * s_;
  const double left = -d.x * s_ + d.y * c_;
  return {-left, forward};
}

Pose AgentFrame::to_agent(const Pose& world) const {
  return {to_agent(world.position), wrap_angle(world.heading - agent_.heading + kHalfPi)};
}

Vec2 AgentFrame::to_world(Vec2 agent) const {
  const double forward = agent.y;
  const double left = -agent.x;
  return {agent_.position.x + forward * c_ - left * s_, agent_.position.y + forward * s_ + left * c_};
}

Pose AgentFrame::to_world(const Pose& agent) const {
  return {to_world(agent.position), wrap_angle(agent.heading + agent_.heading - kHalfPi)};
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  cumulative_.reserve(points_.size());
  double s = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i) s += norm(points_[i] - points_[i - 1]);
    cumulative_.push_back(s);
  }
}

Pose Polyline::pose_at(double s) const {
  if (points_.size() < 2) throw_invalid("pose_at on degenerate polyline");
  s = std::clamp(s, 0.0, length());
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  i = std::clamp<std::size_t>(i, 1, points_.size() - 1);
  const Vec2 a = points_[i - 1], b = points_[i];
  const double seg = cumulative_[i] - cumulative_[i - 1];
  const double t = seg > 0 ? (s - cumulative_[i - 1]) / seg : 0.0;
  const Vec2 d = b - a;
  return {a + d * t, std::atan2(d.y, d.x)};
}

double Polyline::project(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const Vec2 a = points_[i - 1], b = points_[i];
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    const double t = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
    const double dist = norm(p - (a + d * t));
    if (dist < best) {
      best = dist;
      best_s = cumulative_[i - 1] + t * std::sqrt(len2);
    }
  }
  return best_s;
}

double Polyline::distance_to(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < points_.size(); ++i) {
    best = std::min(best, distance_to_segment(p, points_[i - 1], points_[i]));
  }
  return best;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  const double t = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + d * t));
}

namespace {

// Box-local coordinates: (along length axis, along width axis).
Vec2 box_local(Vec2 p, const OrientedBox& box) {
  const Vec2 d = p - box.pose.position;
  const double c = std::cos(box.pose.heading), s = std::sin(box.pose.heading);
  return {d.x * c + d.y * s, -d.x * s + d.y * c};
}

std::array<Vec2, 4> corners(const OrientedBox& box) {
  const double c = std::cos(box.pose.heading), s = std::sin(box.pose.heading);
  const Vec2 u{c, s}, v{-s, c};
  const double hl = box.length / 2, hw = box.width / 2;
  const Vec2 p = box.pose.position;
  return {p + u * hl + v * hw, p + u * hl - v * hw, p - u * hl - v * hw, p - u * hl + v * hw};
}

}  // namespace

bool point_in_box(Vec2 p, const OrientedBox& box) {
  const Vec2 q = box_local(p, box);
  return std::abs(q.x) <= box.length / 2 && std::abs(q.y) <= box.width / 2;
}

double distance_to_box(Vec2 p, const OrientedBox& box) {
  const Vec2 q = box_local(p, box);
  const double dx = std::max(std::abs(q.x) - box.length / 2, 0.0);
  const double dy = std::max(std::abs(q.y) - box.width / 2, 0.0);
  return std::hypot(dx, dy);
}

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = corners(a);
  const auto cb = corners(b);
  for (const auto* box : {&a, &b}) {
    const double c = std::cos(box->pose.heading), s = std::sin(box->pose.heading);
    for (const Vec2 axis : {Vec2{c, s}, Vec2{-s, c}}) {
      double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
      for (const auto& p : ca) {
        amin = std::min(amin, dot(p, axis));
        amax = std::max(amax, dot(p, axis));
      }
      for (const auto& p : cb) {
        bmin = std::min(bmin, dot(p, axis));
        bmax = std::max(bmax, dot(p, axis));
      }
      if (amax < bmin || bmax < amin) return false;
    }
  }
  return true;
}

}  // namespace attnbn::scene
