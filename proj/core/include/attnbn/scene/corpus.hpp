#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "attnbn/scene/raster.hpp"

namespace attnbn::scene {

/// Relative frequency of each scenario kind.
struct KindMix {
  std::vector<std::pair<ScenarioKind, double>> weights;

  /// Equal weight on every kind.
  static KindMix uniform();
  /// "stop_sign=1.0,lead_vehicle_brake=0.5"; weights must be finite, >= 0 and not all zero.
  static KindMix parse(std::string_view text);
};

/// Kind and scene seed of example `index` in a corpus drawn with `seed`.
struct CorpusEntry {
  ScenarioKind kind;
  std::uint64_t scene_seed;
};
std::vector<CorpusEntry> plan_corpus(const KindMix& mix, std::size_t count, std::uint64_t seed);

/// Generates and renders the planned scenes in order.
std::vector<Example> generate_examples(const KindMix& mix, std::size_t count, std::uint64_t seed,
                                       const GridConfig& grid);

}  // namespace attnbn::scene
