#pragma once

#include <vector>

#include "attnbn/scene/scene.hpp"

namespace attnbn::scene {

/// Scripted driver that follows the route centerline. Speed at each step is
/// the minimum of the lane limit, an acceleration cap, and constant-deceleration
/// envelopes sqrt(2 a d) for every stop point (stop signs, red/yellow lights,
/// occupied crosswalks) and lead vehicle; stops leave kStopMargin between the
/// agent's front bumper and the line or object. Parked vehicles beside the lane
/// cap speed at 60% of the limit through the pinch.
///
/// Returns K world-frame poses at t = dt .. K dt. Throws kInvalidArgument when
/// the scene has no route and kScenarioGeneration when the route is too short.
std::vector<Pose> expert_policy(const VectorScene& scene);

}  // namespace attnbn::scene
