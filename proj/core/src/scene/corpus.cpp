#include "attnbn/scene/corpus.hpp"

#include <cmath>
#include <string>

#include "attnbn/error.hpp"
#include "attnbn/numerics/random.hpp"
#include "attnbn/scene/generator.hpp"

namespace attnbn::scene {

KindMix KindMix::uniform() {
  KindMix mix;
  for (auto kind : kAllScenarioKinds) mix.weights.emplace_back(kind, 1.0);
  return mix;
}

KindMix KindMix::parse(std::string_view text) {
  KindMix mix;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string item(text.substr(pos, end - pos));
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw_invalid("kind mix item '" + item + "' lacks '='");
    const ScenarioKind kind = parse_scenario_kind(item.substr(0, eq));
    double w = 0.0;
    try {
      std::size_t used = 0;
      w = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw_invalid("kind mix weight '" + item.substr(eq + 1) + "' is not a number");
    }
    if (!std::isfinite(w) || w < 0) throw_invalid("kind mix weight for " + item.substr(0, eq) + " must be >= 0");
    for (const auto& [k, _] : mix.weights) {
      if (k == kind) throw_invalid("kind " + item.substr(0, eq) + " listed twice");
    }
    mix.weights.emplace_back(kind, w);
    pos = end + 1;
  }
  double total = 0.0;
  for (const auto& [_, w] : mix.weights) total += w;
  if (!(total > 0)) throw_invalid("kind mix needs at least one positive weight");
  return mix;
}

std::vector<CorpusEntry> plan_corpus(const KindMix& mix, std::size_t count, std::uint64_t seed) {
  double total = 0.0;
  for (const auto& [_, w] : mix.weights) total += w;
  if (!(total > 0)) throw_invalid("kind mix needs at least one positive weight");
  ScenarioKind fallback = mix.weights.back().first;
  for (const auto& [k, w] : mix.weights) {
    if (w > 0) fallback = k;
  }
  num::Rng rng(num::mix_seed(seed, 0x6b696e64));
  std::vector<CorpusEntry> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.uniform() * total;
    double acc = 0.0;
    ScenarioKind kind = fallback;
    for (const auto& [k, w] : mix.weights) {
      acc += w;
      if (u < acc && w > 0) {
        kind = k;
        break;
      }
    }
    out.push_back({kind, num::mix_seed(seed, i + 1)});
  }
  return out;
}

std::vector<Example> generate_examples(const KindMix& mix, std::size_t count, std::uint64_t seed,
                                       const GridConfig& grid) {
  std::vector<Example> out;
  out.reserve(count);
  for (const auto& e : plan_corpus(mix, count, seed)) {
    out.push_back(make_example(generate_scenario(e.kind, e.scene_seed), grid));
  }
  return out;
}

}  // namespace attnbn::scene
