#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "attnbn/model/config.hpp"
#include "attnbn/numerics/mlp.hpp"
#include "attnbn/numerics/parameters.hpp"
#include "attnbn/scene/geometry.hpp"
#include "attnbn/scene/raster.hpp"

namespace attnbn::model {

using num::DenseLayer;
using num::Tensor;

struct ConvLayer {
  Tensor kernel;  // [kh, kw, in, out]
  Tensor bias;    // [out]
};

/// Two stride-2 stages, each followed by a residual 3x3 conv, then three 3x3 convs.
struct FeatureNetWeights {
  ConvLayer stage1, stage1_skip, stage2, stage2_skip;
  std::array<ConvLayer, 3> body;
};

struct VanillaAttentionWeights {
  std::vector<DenseLayer> mlp;  // d -> hidden -> 1
};

struct AtrousAttentionWeights {
  std::array<ConvLayer, 3> branches;  // 1x1, 3x3 rate 2, 3x3 rate 4
  std::array<Tensor, 3> norm_scale;
  std::array<Tensor, 3> norm_shift;
  ConvLayer logits;  // 1x1, 3d -> 1
};

struct AgentRnnWeights {
  ConvLayer context;  // 3x3 over the features (plus broadcast z)
  ConvLayer step;     // 3x3 over [memory, previous box, iteration plane]
  ConvLayer hidden;   // 3x3 rnn_hidden -> rnn_hidden
  ConvLayer head;     // 1x1 rnn_hidden -> 2 (position logit, box logit)
  std::vector<DenseLayer> heading;  // pooled hidden -> mlp_hidden -> 1
};

struct ObjectBranchWeights {
  FeatureNetWeights features;
  AtrousAttentionWeights attention;
  ConvLayer occupancy;  // 3x3 d -> K
};

struct AttentionResult {
  Tensor alpha;     // [h, w], sums to 1
  Tensor attended;  // [h, w, d], alpha_i * f_i
};

/// [H, W, C] input -> [H/4, W/4, d].
Tensor feature_net(const FeatureNetWeights& w, const Tensor& input);
AttentionResult vanilla_attention(const VanillaAttentionWeights& w, const Tensor& features);
AttentionResult atrous_spatial_attention(const AtrousAttentionWeights& w, const Tensor& features);
/// Per-cell g_MLP over [a_i; v_i] pooled over cells. `basis` may be undefined (no PE).
Tensor bottleneck_encode(std::span<const DenseLayer> g_mlp, const Tensor& attended, const Tensor& basis,
                         PoolMode pool);

/// Maps soft-argmax cell coordinates to agent-frame meters on the feature grid.
struct FeatureGeometry {
  std::size_t rows = 16, cols = 16;
  double cell_m = 1.0;
  double anchor_u = 8.0, anchor_v = 12.0;  // agent position in continuous cell coordinates

  static FeatureGeometry from(const ModelConfig& config);
  scene::Vec2 to_meters(scene::Vec2 cell) const;
  scene::Vec2 to_cells(scene::Vec2 meters) const;
};

struct RnnStepOutput {
  Tensor position_cells;  // [2] = (u, v), soft-argmax of the position logits
  Tensor position_m;      // [2] = (x right, y forward) meters
  Tensor heading;         // [1] radians, counter-clockwise from +x
  Tensor position_logits; // [h, w]
  Tensor box_logits;      // [h, w]
  Tensor box;             // [h, w], sigmoid(box_logits)
  Tensor memory;          // [h, w], max(previous memory, splat(position))
};

/// Step-independent part of the recurrent head: a conv over the features, with z
/// broadcast to every cell and depth-concatenated when defined.
Tensor agent_rnn_context(const AgentRnnWeights& w, const Tensor& features, const Tensor& z);
/// One iteration k in [1, horizon] given the previous memory and box heatmap.
RnnStepOutput agent_rnn_step(const AgentRnnWeights& w, const FeatureGeometry& geometry, std::size_t k,
                             std::size_t horizon, const Tensor& context, const Tensor& memory,
                             const Tensor& box);

struct RolloutOptions {
  /// Replace z by zeros (bottleneck variants).
  bool zero_bottleneck = false;
  /// Replace the object-branch attended features by zeros.
  bool zero_object_features = false;
};

struct Rollout {
  std::vector<Tensor> position_m;       // K x [2]
  std::vector<Tensor> heading;          // K x [1]
  std::vector<Tensor> position_logits;  // K x [h, w]
  std::vector<Tensor> box_logits;       // K x [h, w]
  std::vector<Tensor> box;              // K x [h, w]
  std::vector<Tensor> memory;           // K x [h, w]
  Tensor alpha;               // [h, w]; undefined for attention=none
  Tensor z;                   // [d_z]; bottleneck variants only
  Tensor object_alpha;        // object branch only
  Tensor occupancy_logits;    // [h, w, K]; object branch only
  std::size_t feature_net_calls = 0;

  std::vector<scene::Pose> poses() const;
};

/// Weights of one variant plus the operations that use them. Parameters live in
/// a ParameterSet with stable, descriptive names ("feature_I.stage1.kernel").
class Network {
 public:
  Network(VariantConfig variant, ModelConfig config, std::uint64_t init_seed);
  /// Adopts existing parameters; names and shapes must match the variant exactly.
  Network(VariantConfig variant, ModelConfig config, num::ParameterSet params);

  const VariantConfig& variant() const { return variant_; }
  const ModelConfig& config() const { return config_; }
  const num::ParameterSet& parameters() const { return params_; }
  num::ParameterSet& parameters() { return params_; }

  /// [H, W, C] input tensors built from the raster's channels.
  Tensor input_all(const scene::RasterStack& raster) const;
  Tensor input_dense(const scene::RasterStack& raster) const;
  Tensor input_objects(const scene::RasterStack& raster) const;
  /// Previous-box heatmap for k = 1: the current agent box averaged onto the feature grid.
  Tensor initial_box(const scene::RasterStack& raster) const;

  Rollout rollout(const scene::RasterStack& raster, const RolloutOptions& options = {}) const;

  FeatureNetWeights feature_weights(const char* prefix) const;
  VanillaAttentionWeights vanilla_weights() const;
  AtrousAttentionWeights atrous_weights(const char* prefix) const;
  std::vector<DenseLayer> bottleneck_mlp() const;
  AgentRnnWeights rnn_weights() const;
  ObjectBranchWeights object_weights() const;

 private:
  Tensor input_channels(const scene::RasterStack& raster, std::span<const std::string> names) const;
  const Tensor& p(const std::string& name) const { return params_.at(name); }

  VariantConfig variant_;
  ModelConfig config_;
  num::ParameterSet params_;
};

/// Names and shapes every parameter of the variant must have, in creation order.
std::vector<std::pair<std::string, num::Shape>> parameter_layout(const VariantConfig& variant,
                                                                  const ModelConfig& config);

}  // namespace attnbn::model
