#pragma once

#include <span>
#include <vector>

#include "attnbn/scene/geometry.hpp"
#include "attnbn/scene/scene.hpp"

namespace attnbn::eval {

using scene::Vec2;

/// Mean Euclidean distance over matching waypoints.
double ade(std::span<const Vec2> pred, std::span<const Vec2> gt);
/// Distance at the final waypoint.
double fde(std::span<const Vec2> pred, std::span<const Vec2> gt);
/// Largest per-step distance.
double max_step_error(std::span<const Vec2> pred, std::span<const Vec2> gt);

std::vector<Vec2> positions(std::span<const scene::Pose> poses);

/// Mean over steps of sum_ij B_k(i, j) * O_k(i, j): predicted agent heatmap
/// against other-object occupancy at the same future step.
double collision_rate(std::span<const std::vector<double>> agent_heatmaps,
                      std::span<const std::vector<double>> object_occupancy);

/// -sum alpha ln alpha in nats (0 ln 0 = 0). Throws when alpha does not sum to
/// 1 within 1e-4 or has negative entries.
double attention_entropy(std::span<const double> alpha);

/// Sum of a [side x side] map over pixels whose centers lie within `dilation_m`
/// of any of the boxes (agent-frame meters, geometry given by `grid`).
double attention_mass_in_region(std::span<const double> alpha, const scene::GridConfig& grid,
                                std::span<const scene::OrientedBox> region, double dilation_m);

}  // namespace attnbn::eval
