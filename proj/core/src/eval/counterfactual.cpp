#include "attnbn/eval/counterfactual.hpp"

#include <algorithm>
#include <charconv>

#include "attnbn/error.hpp"
#include "attnbn/eval/metrics.hpp"
#include "attnbn/eval/upsample.hpp"
#include "attnbn/numerics/tensor.hpp"
#include "attnbn/scene/generator.hpp"
#include "attnbn/scene/raster.hpp"

namespace attnbn::eval {

using scene::OrientedBox;
using scene::Pose;
using scene::Vec2;

namespace {

int parse_id(std::string_view text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw_invalid("mutation: '" + std::string(text) + "' is not an integer id");
  }
  return v;
}

OrientedBox stop_line_box(const scene::VectorScene& s, int lane_id, double station) {
  const scene::Lane* lane = s.find_lane(lane_id);
  if (!lane) throw_invalid("mutation: lane " + std::to_string(lane_id) + " missing");
  const Pose p = lane->centerline.pose_at(station);
  return {p, 0.5, scene::kLaneWidth};
}

OrientedBox to_agent(const scene::AgentFrame& frame, const OrientedBox& b) {
  return {frame.to_agent(b.pose), b.length, b.width};
}

}  // namespace

Mutation Mutation::parse(std::string_view text) {
  Mutation m;
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view() : text.substr(colon + 1);
  auto need_arg = [&](bool want) {
    if (want == arg.empty()) {
      throw_invalid("mutation '" + std::string(text) + "': " + (want ? "missing argument" : "takes no argument"));
    }
  };
  if (head == "identity") {
    need_arg(false);
  } else if (head == "remove_objects") {
    need_arg(false);
    m.kind = Kind::kRemoveObjects;
  } else if (head == "remove_object") {
    need_arg(true);
    m.kind = Kind::kRemoveObjectById;
    m.target_id = parse_id(arg);
  } else if (head == "set_light") {
    need_arg(true);
    const auto eq = arg.find('=');
    if (eq == std::string_view::npos) throw_invalid("mutation set_light expects <id>=<state>");
    m.kind = Kind::kSetLightState;
    m.target_id = parse_id(arg.substr(0, eq));
    m.light_state = scene::parse_light_state(arg.substr(eq + 1));
  } else if (head == "remove_sign") {
    m.kind = Kind::kRemoveSign;
    if (!arg.empty()) m.target_id = parse_id(arg);
  } else {
    throw_invalid("unknown mutation '" + std::string(text) + "'");
  }
  return m;
}

std::string Mutation::to_string() const {
  switch (kind) {
    case Kind::kIdentity: return "identity";
    case Kind::kRemoveObjects: return "remove_objects";
    case Kind::kRemoveObjectById: return "remove_object:" + std::to_string(target_id);
    case Kind::kSetLightState:
      return "set_light:" + std::to_string(target_id) + "=" + std::string(scene::to_string(light_state));
    case Kind::kRemoveSign: return target_id < 0 ? "remove_sign" : "remove_sign:" + std::to_string(target_id);
  }
  return "?";
}

scene::VectorScene apply_mutation(const scene::VectorScene& original, const Mutation& m) {
  scene::VectorScene s = original;
  switch (m.kind) {
    case Mutation::Kind::kIdentity:
      return s;
    case Mutation::Kind::kRemoveObjects:
      if (s.objects.empty()) throw_invalid("remove_objects: scene has no objects");
      s.objects.clear();
      break;
    case Mutation::Kind::kRemoveObjectById: {
      const auto it = std::find_if(s.objects.begin(), s.objects.end(), [&](const auto& o) { return o.id == m.target_id; });
      if (it == s.objects.end()) throw_invalid("remove_object: no object with id " + std::to_string(m.target_id));
      s.objects.erase(it);
      break;
    }
    case Mutation::Kind::kSetLightState: {
      const auto it = std::find_if(s.traffic_lights.begin(), s.traffic_lights.end(),
                                   [&](const auto& l) { return l.id == m.target_id; });
      if (it == s.traffic_lights.end()) throw_invalid("set_light: no light with id " + std::to_string(m.target_id));
      it->states.fill(m.light_state);
      break;
    }
    case Mutation::Kind::kRemoveSign: {
      const std::size_t before = s.stop_signs.size();
      std::erase_if(s.stop_signs, [&](const auto& sign) { return m.target_id < 0 || sign.id == m.target_id; });
      if (s.stop_signs.size() == before) throw_invalid("remove_sign: no matching stop sign");
      break;
    }
  }
  scene::refresh_expert(s);
  return s;
}

std::vector<OrientedBox> mutation_region(const scene::VectorScene& s, const Mutation& m) {
  const scene::AgentFrame frame(s.agent_pose);
  std::vector<OrientedBox> out;
  switch (m.kind) {
    case Mutation::Kind::kIdentity:
      break;
    case Mutation::Kind::kRemoveObjects:
    case Mutation::Kind::kRemoveObjectById:
      for (const auto& o : s.objects) {
        if (m.kind == Mutation::Kind::kRemoveObjects || o.id == m.target_id) out.push_back(to_agent(frame, o.current()));
      }
      break;
    case Mutation::Kind::kSetLightState:
      for (const auto& l : s.traffic_lights) {
        if (l.id == m.target_id) out.push_back(to_agent(frame, stop_line_box(s, l.lane_id, l.station)));
      }
      break;
    case Mutation::Kind::kRemoveSign:
      for (const auto& sign : s.stop_signs) {
        if (m.target_id >= 0 && sign.id != m.target_id) continue;
        out.push_back(to_agent(frame, stop_line_box(s, sign.lane_id, sign.station)));
        out.push_back(to_agent(frame, OrientedBox{{sign.marker, s.agent_pose.heading}, 1.0, 1.0}));
      }
      break;
  }
  return out;
}

CounterfactualResult counterfactual(const model::Network& network, const scene::VectorScene& scene,
                                    const Mutation& mutation, const scene::GridConfig& grid) {
  if (network.variant().attention == model::AttentionMode::kNone) {
    throw Error(ErrorCode::kUnsupportedVariant, "counterfactual needs a variant with attention");
  }
  const scene::VectorScene mutated = apply_mutation(scene, mutation);
  const auto region = mutation_region(scene, mutation);

  num::NoGradGuard guard;
  CounterfactualResult r;
  r.original = network.rollout(scene::rasterize(scene, grid));
  r.mutated = network.rollout(scene::rasterize(mutated, grid));
  const std::size_t h = r.original.alpha.dim(0), w = r.original.alpha.dim(1);
  const std::size_t side = static_cast<std::size_t>(grid.resolution);
  r.alpha_original = upsample_pyramid(r.original.alpha.values(), h, w, side, side);
  r.alpha_mutated = upsample_pyramid(r.mutated.alpha.values(), h, w, side, side);
  r.delta_alpha.resize(r.alpha_original.size());
  for (std::size_t i = 0; i < r.delta_alpha.size(); ++i) r.delta_alpha[i] = r.alpha_mutated[i] - r.alpha_original[i];

  const double dilation = kRegionDilationCells * network.config().feature_cell_m();
  r.mass_original = attention_mass_in_region(r.alpha_original, grid, region, dilation);
  r.mass_mutated = attention_mass_in_region(r.alpha_mutated, grid, region, dilation);
  r.trajectory_ade = ade(positions(r.original.poses()), positions(r.mutated.poses()));
  return r;
}

}  // namespace attnbn::eval
