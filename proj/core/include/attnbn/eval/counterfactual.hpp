#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "attnbn/model/network.hpp"
#include "attnbn/scene/scene.hpp"

namespace attnbn::eval {

struct Mutation {
  enum class Kind { kIdentity, kRemoveObjects, kRemoveObjectById, kSetLightState, kRemoveSign };
  Kind kind = Kind::kIdentity;
  int target_id = -1;  // object, light or sign id; -1 = every sign for kRemoveSign
  scene::LightState light_state = scene::LightState::kUnknown;

  /// "identity", "remove_objects", "remove_object:<id>", "set_light:<id>=<red|yellow|green|unknown>",
  /// "remove_sign" or "remove_sign:<id>".
  static Mutation parse(std::string_view text);
  std::string to_string() const;
};

/// Applies the mutation and recomputes the expert. Throws kInvalidArgument when
/// the mutation does not apply (no objects, unknown id, ...).
scene::VectorScene apply_mutation(const scene::VectorScene& scene, const Mutation& mutation);

/// Agent-frame boxes covering the entities the mutation touches, measured on the
/// original scene. Empty for the identity.
std::vector<scene::OrientedBox> mutation_region(const scene::VectorScene& scene, const Mutation& mutation);

/// Feature cells absorbed around a region when measuring attention mass.
inline constexpr double kRegionDilationCells = 3.0;

struct CounterfactualResult {
  model::Rollout original;
  model::Rollout mutated;
  std::vector<double> alpha_original;  // upsampled to the raster resolution
  std::vector<double> alpha_mutated;
  std::vector<double> delta_alpha;     // mutated - original
  double mass_original = 0.0;          // attention mass in the dilated region
  double mass_mutated = 0.0;
  double trajectory_ade = 0.0;         // ADE between the two predicted trajectories
};

CounterfactualResult counterfactual(const model::Network& network, const scene::VectorScene& scene,
                                    const Mutation& mutation, const scene::GridConfig& grid);

}  // namespace attnbn::eval
