#include "attnbn/model/config.hpp"

#include <map>

#include "attnbn/error.hpp"

namespace attnbn::model {

std::string_view to_string(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::kNone: return "none";
    case AttentionMode::kVanilla: return "vanilla";
    case AttentionMode::kBottleneck: return "bottleneck";
  }
  return "?";
}

void VariantConfig::validate() const {
  auto reject = [&](const std::string& why) {
    throw Error(ErrorCode::kUnsupportedVariant, "variant '" + to_string() + "': " + why);
  };
  if (attention == AttentionMode::kNone && (atrous || positional_encoding || object_branch)) {
    reject("attention=none takes no attention flags");
  }
  if (attention != AttentionMode::kBottleneck && positional_encoding) {
    reject("positional encoding only applies to the bottleneck");
  }
  if (attention != AttentionMode::kBottleneck && object_branch) {
    reject("the object branch feeds the bottleneck");
  }
}

std::string VariantConfig::to_string() const {
  auto flag = [](bool b) { return b ? "on" : "off"; };
  return "attention=" + std::string(model::to_string(attention)) + ",atrous=" + flag(atrous) +
         ",pe=" + flag(positional_encoding) + ",object=" + flag(object_branch);
}

VariantConfig VariantConfig::parse(std::string_view text) {
  VariantConfig v{AttentionMode::kBottleneck, false, false, false};
  std::map<std::string, std::string> seen;
  std::size_t pos = 0;
  while (pos <= text.size() && !text.empty()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, end - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw_invalid("variant item '" + std::string(item) + "' lacks '='");
    const std::string key(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    if (!seen.emplace(key, value).second) throw_invalid("variant key '" + key + "' repeated");
    auto on_off = [&]() {
      if (value == "on" || value == "true" || value == "1") return true;
      if (value == "off" || value == "false" || value == "0") return false;
      throw_invalid("variant flag '" + key + "' expects on/off, got '" + value + "'");
    };
    if (key == "attention") {
      if (value == "none") v.attention = AttentionMode::kNone;
      else if (value == "vanilla") v.attention = AttentionMode::kVanilla;
      else if (value == "bottleneck") v.attention = AttentionMode::kBottleneck;
      else throw_invalid("unknown attention mode '" + value + "'");
    } else if (key == "atrous") {
      v.atrous = on_off();
    } else if (key == "pe") {
      v.positional_encoding = on_off();
    } else if (key == "object") {
      v.object_branch = on_off();
    } else {
      throw_invalid("unknown variant key '" + key + "'");
    }
    pos = end + 1;
  }
  v.validate();
  return v;
}

VariantConfig model_a() { return {AttentionMode::kNone, false, false, false}; }
VariantConfig model_b() { return {AttentionMode::kVanilla, false, false, false}; }
VariantConfig full_bottleneck() { return {AttentionMode::kBottleneck, true, true, false}; }

void ModelConfig::validate() const {
  if (resolution == 0 || resolution % kDownsample != 0) {
    throw_invalid("model resolution must be a positive multiple of " + std::to_string(kDownsample));
  }
  if (feature_dim == 0 || feature_dim % 4 != 0) throw_invalid("feature_dim must be a positive multiple of 4");
  if (input_channels == 0 || dense_channels == 0 || object_channels == 0 || stem_dim == 0 ||
      bottleneck_dim == 0 || mlp_hidden == 0 || rnn_hidden == 0 || horizon == 0) {
    throw_invalid("model widths and horizon must be positive");
  }
  if (!(field_of_view_m > 0)) throw_invalid("field of view must be positive");
}

}  // namespace attnbn::model
