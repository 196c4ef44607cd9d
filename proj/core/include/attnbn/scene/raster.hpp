#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attnbn/scene/scene.hpp"

namespace attnbn::scene {

/// Canonical channel order of the input stack I (17 channels).
const std::vector<std::string>& channel_names();
/// Channels of the dense context subset S.
const std::vector<std::string>& dense_channel_names();
/// The five dynamic-object frames (input O of the object branch).
const std::vector<std::string>& object_channel_names();

using Grid = std::vector<float>;  // row-major resolution x resolution

struct RasterStack {
  int resolution = 0;
  std::vector<std::string> names;
  std::vector<Grid> channels;
  std::vector<std::string> dense_subset_names;

  std::size_t index_of(std::string_view name) const;
  std::span<const float> channel(std::string_view name) const;
  /// Channel indices for a list of names, in the given order.
  std::vector<std::size_t> indices_of(std::span<const std::string> subset) const;
};

/// Renders the scene into the agent-centred grid. Values are max-composited in
/// [0, 1]; a pixel belongs to a shape when its center does.
RasterStack rasterize(const VectorScene& scene, const GridConfig& grid);

/// Occupancy grid of one oriented box given in agent-frame meters.
Grid render_box(const GridConfig& grid, const OrientedBox& agent_frame_box);

/// Union of all objects' boxes at future step k (0-based, t = (k + 1) dt).
Grid render_future_objects(const VectorScene& scene, const GridConfig& grid, std::size_t k);

/// Training example: rasters plus targets, everything in the agent frame.
/// Float-valued fields are stored at 32-bit precision.
struct Example {
  RasterStack raster;
  std::vector<Pose> expert_future;  // K poses, meters + heading, agent frame
  std::vector<Pose> agent_past;     // kPastSteps poses, agent frame, oldest first
  std::vector<Grid> future_object_occupancy;  // K grids
  ScenarioKind kind = ScenarioKind::kStraight;
  std::uint64_t seed = 0;
};

Example make_example(const VectorScene& scene, const GridConfig& grid);

/// Agent-frame waypoints in continuous pixel coordinates of `grid`.
std::vector<Vec2> waypoints_in_pixels(const Example& example, const GridConfig& grid);

/// Average-pools a resolution x resolution grid by an integer factor.
std::vector<double> downsample(std::span<const float> grid, int resolution, int factor);

}  // namespace attnbn::scene
