#pragma once

#include <cstdint>

#include "attnbn/scene/scene.hpp"

namespace attnbn::scene {

/// Procedurally builds a scene of the given kind. Deterministic per (kind, seed).
///
/// Geometry ranges (agent-relative):
///   speed limit 3-5 m/s; initial speed equals the limit for `straight`, 60-100%
///   of it otherwise; curvature 0.03-0.10 1/m for `curved_road`; stop lines,
///   crosswalks and lights 4.5-11.5 m ahead (always reachable at comfortable
///   deceleration); lead vehicle 7-10 m ahead braking at 1.5-3 m/s^2.
/// The whole scene is placed at a random world pose.
VectorScene generate_scenario(ScenarioKind kind, std::uint64_t seed);

/// Builds a scene with a single straight lane of the given limit and an agent at
/// the given speed; no other content. Used by tests and by custom scenes.
VectorScene straight_road_scene(double speed_limit, double agent_speed);

/// Recomputes expert_future from the scene content and re-validates.
void refresh_expert(VectorScene& scene);

}  // namespace attnbn::scene
