#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace attnbn::model {

enum class AttentionMode { kNone, kVanilla, kBottleneck };
enum class PoolMode { kMean, kSum };

std::string_view to_string(AttentionMode mode);

/// Architecture switches of the ablation grid.
///
///   attention=none        model A: one FeatureNet on all inputs, no attention
///   attention=vanilla     model B: attended features replace the FeatureNet output
///   attention=bottleneck  dense branch on S plus an attention bottleneck on all inputs
///
/// `atrous` selects the dilated-convolution attention head instead of the per-cell
/// MLP; `pe` appends the Fourier basis before pooling; `object` adds the dynamic
/// object branch. pe and object require the bottleneck; none forbids every flag.
struct VariantConfig {
  AttentionMode attention = AttentionMode::kBottleneck;
  bool atrous = true;
  bool positional_encoding = true;
  bool object_branch = false;

  /// Throws kUnsupportedVariant for forbidden combinations.
  void validate() const;
  /// Canonical "attention=...,atrous=on|off,pe=on|off,object=on|off".
  std::string to_string() const;
  /// Accepts the canonical form with keys in any order; omitted keys default
  /// to off (attention defaults to bottleneck). Throws kInvalidArgument on bad
  /// syntax and kUnsupportedVariant on forbidden combinations.
  static VariantConfig parse(std::string_view text);

  friend bool operator==(const VariantConfig&, const VariantConfig&) = default;
};

VariantConfig model_a();
VariantConfig model_b();
VariantConfig full_bottleneck();

struct ModelConfig {
  std::size_t input_channels = 17;
  std::size_t dense_channels = 5;
  std::size_t object_channels = 5;
  std::size_t resolution = 64;
  std::size_t feature_dim = 32;       // d
  std::size_t stem_dim = 16;          // width of the first FeatureNet stage
  std::size_t bottleneck_dim = 32;    // d_z
  std::size_t mlp_hidden = 64;
  std::size_t rnn_hidden = 32;
  std::size_t horizon = 10;           // K = N
  double field_of_view_m = 16.0;
  PoolMode pool = PoolMode::kMean;

  static constexpr std::size_t kDownsample = 4;
  std::size_t feature_resolution() const { return resolution / kDownsample; }
  double feature_cell_m() const { return field_of_view_m / static_cast<double>(feature_resolution()); }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace attnbn::model
