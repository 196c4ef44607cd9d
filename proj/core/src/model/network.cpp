#include "attnbn/model/network.hpp"

#include <cmath>
#include <numbers>

#include "attnbn/error.hpp"
#include "attnbn/model/positional.hpp"
#include "attnbn/numerics/ops.hpp"

namespace attnbn::model {

using num::Shape;

namespace {

Tensor conv(const ConvLayer& layer, const Tensor& x, std::size_t dilation = 1, std::size_t stride = 1) {
  return num::conv2d(x, layer.kernel, layer.bias, {dilation, stride});
}

// Features leaving an attention head are alpha-weighted, so uniform attention
// would shrink them by the cell count. Consumers multiply by the cell count to
// keep them at the scale of the unattended features.
Tensor attended_gain(const Tensor& attended) {
  return num::scale(attended, static_cast<double>(attended.dim(0) * attended.dim(1)));
}

struct LayoutBuilder {
  std::vector<std::pair<std::string, Shape>> entries;

  void conv(const std::string& name, std::size_t k, std::size_t in, std::size_t out, bool bias = true) {
    entries.emplace_back(name + ".kernel", Shape{k, k, in, out});
    if (bias) entries.emplace_back(name + ".bias", Shape{out});
  }
  void dense(const std::string& name, std::size_t in, std::size_t out) {
    entries.emplace_back(name + ".weight", Shape{in, out});
    entries.emplace_back(name + ".bias", Shape{out});
  }
  void feature_net(const std::string& prefix, std::size_t in, const ModelConfig& c) {
    conv(prefix + ".stage1", 3, in, c.stem_dim);
    conv(prefix + ".stage1_skip", 3, c.stem_dim, c.stem_dim);
    conv(prefix + ".stage2", 3, c.stem_dim, c.feature_dim);
    conv(prefix + ".stage2_skip", 3, c.feature_dim, c.feature_dim);
    for (int i = 0; i < 3; ++i) conv(prefix + ".body" + std::to_string(i), 3, c.feature_dim, c.feature_dim);
  }
  void atrous(const std::string& prefix, std::size_t dim) {
    conv(prefix + ".branch0", 1, dim, dim);
    conv(prefix + ".branch1", 3, dim, dim);
    conv(prefix + ".branch2", 3, dim, dim);
    for (int i = 0; i < 3; ++i) {
      entries.emplace_back(prefix + ".norm" + std::to_string(i) + ".scale", Shape{dim});
      entries.emplace_back(prefix + ".norm" + std::to_string(i) + ".shift", Shape{dim});
    }
    conv(prefix + ".logits", 1, 3 * dim, 1);
  }
};

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<std::pair<std::string, Shape>> parameter_layout(const VariantConfig& variant,
                                                             const ModelConfig& c) {
  variant.validate();
  c.validate();
  LayoutBuilder b;
  const bool bottleneck = variant.attention == AttentionMode::kBottleneck;
  b.feature_net("feature_I", c.input_channels, c);
  if (bottleneck) b.feature_net("feature_S", c.dense_channels, c);
  if (variant.object_branch) {
    b.feature_net("feature_O", c.object_channels, c);
    b.atrous("object_attention", c.feature_dim);
    b.conv("object.occupancy", 3, c.feature_dim, c.horizon);
  }
  const std::size_t attended_dim = c.feature_dim * (variant.object_branch ? 2 : 1);
  if (variant.attention != AttentionMode::kNone) {
    if (variant.atrous) {
      b.atrous("attention", attended_dim);
    } else {
      b.dense("attention.mlp0", attended_dim, c.mlp_hidden);
      b.dense("attention.mlp1", c.mlp_hidden, 1);
    }
  }
  if (bottleneck) {
    const std::size_t in = attended_dim + (variant.positional_encoding ? c.feature_dim : 0);
    b.dense("bottleneck.mlp0", in, c.mlp_hidden);
    b.dense("bottleneck.mlp1", c.mlp_hidden, c.bottleneck_dim);
  }
  const std::size_t context_in = c.feature_dim + (bottleneck ? c.bottleneck_dim : 0);
  b.conv("rnn.context", 3, context_in, c.rnn_hidden);
  b.conv("rnn.step", 3, 3, c.rnn_hidden, false);
  b.conv("rnn.hidden", 3, c.rnn_hidden, c.rnn_hidden);
  b.conv("rnn.head", 1, c.rnn_hidden, 2);
  b.dense("rnn.heading0", c.rnn_hidden, c.mlp_hidden);
  b.dense("rnn.heading1", c.mlp_hidden, 1);
  return b.entries;
}

FeatureGeometry FeatureGeometry::from(const ModelConfig& config) {
  FeatureGeometry g;
  g.rows = g.cols = config.feature_resolution();
  g.cell_m = config.feature_cell_m();
  g.anchor_u = 0.5 * static_cast<double>(g.cols);
  g.anchor_v = 0.75 * static_cast<double>(g.rows);
  return g;
}

scene::Vec2 FeatureGeometry::to_meters(scene::Vec2 cell) const {
  return {(cell.x - anchor_u) * cell_m, (anchor_v - cell.y) * cell_m};
}

scene::Vec2 FeatureGeometry::to_cells(scene::Vec2 meters) const {
  return {anchor_u + meters.x / cell_m, anchor_v - meters.y / cell_m};
}

Tensor feature_net(const FeatureNetWeights& w, const Tensor& input) {
  if (input.rank() != 3 || input.dim(2) != w.stage1.kernel.dim(2)) {
    throw_invalid("feature_net: input " + num::to_string(input.shape()) + " does not match " +
                  std::to_string(w.stage1.kernel.dim(2)) + " configured channels");
  }
  Tensor h = num::relu(conv(w.stage1, input, 1, 2));
  h = num::add(h, num::relu(conv(w.stage1_skip, h)));
  h = num::relu(conv(w.stage2, h, 1, 2));
  h = num::add(h, num::relu(conv(w.stage2_skip, h)));
  for (const auto& layer : w.body) h = num::relu(conv(layer, h));
  return h;
}

AttentionResult vanilla_attention(const VanillaAttentionWeights& w, const Tensor& features) {
  const Tensor logits = num::mlp(w.mlp, features);
  const Tensor alpha = num::spatial_softmax(logits);
  return {alpha, num::scale_cells(features, alpha)};
}

AttentionResult atrous_spatial_attention(const AtrousAttentionWeights& w, const Tensor& features) {
  static constexpr std::array<std::size_t, 3> kRates = {1, 2, 4};
  std::array<Tensor, 3> branches;
  for (std::size_t i = 0; i < 3; ++i) {
    const Tensor y = conv(w.branches[i], features, kRates[i]);
    branches[i] = num::relu(num::channel_norm(y, w.norm_scale[i], w.norm_shift[i]));
  }
  const Tensor logits = conv(w.logits, num::concat_channels(branches));
  const Tensor alpha = num::spatial_softmax(logits);
  return {alpha, num::scale_cells(features, alpha)};
}

Tensor bottleneck_encode(std::span<const DenseLayer> g_mlp, const Tensor& attended, const Tensor& basis,
                         PoolMode pool) {
  if (attended.rank() != 3) throw_invalid("bottleneck_encode: attended features must be [h, w, d]");
  Tensor input = attended;
  if (basis.defined()) {
    if (basis.rank() != 3 || basis.dim(0) != attended.dim(0) || basis.dim(1) != attended.dim(1)) {
      throw_invalid("bottleneck_encode: basis " + num::to_string(basis.shape()) +
                    " is not aligned with " + num::to_string(attended.shape()));
    }
    const std::array<Tensor, 2> parts = {attended, basis};
    input = num::concat_channels(parts);
  }
  const Tensor per_cell = num::mlp(g_mlp, input);
  return pool == PoolMode::kMean ? num::mean_pool_spatial(per_cell) : num::sum_pool_spatial(per_cell);
}

Tensor agent_rnn_context(const AgentRnnWeights& w, const Tensor& features, const Tensor& z) {
  if (!z.defined()) return conv(w.context, features);
  const std::array<Tensor, 2> parts = {features, num::broadcast_cells(z, features.dim(0), features.dim(1))};
  return conv(w.context, num::concat_channels(parts));
}

RnnStepOutput agent_rnn_step(const AgentRnnWeights& w, const FeatureGeometry& g, std::size_t k,
                             std::size_t horizon, const Tensor& context, const Tensor& memory,
                             const Tensor& box) {
  if (k < 1 || k > horizon) {
    throw_invalid("agent_rnn_step: k=" + std::to_string(k) + " outside [1, " + std::to_string(horizon) + "]");
  }
  const Shape plane{g.rows, g.cols, 1};
  const Tensor k_plane = Tensor::filled(plane, static_cast<double>(k) / static_cast<double>(horizon));
  const std::array<Tensor, 3> step_in = {num::reshape(memory, plane), num::reshape(box, plane), k_plane};
  const Tensor h1 = num::relu(num::add(context, conv(w.step, num::concat_channels(step_in))));
  const Tensor h2 = num::relu(conv(w.hidden, h1));
  const Tensor out = conv(w.head, h2);

  RnnStepOutput r;
  r.position_logits = num::slice_channel(out, 0);
  r.box_logits = num::slice_channel(out, 1);
  r.box = num::sigmoid(r.box_logits);

  // Soft-argmax: expected cell-center coordinates under the position softmax.
  const std::size_t cells = g.rows * g.cols;
  std::vector<double> centers(cells * 2);
  for (std::size_t i = 0; i < cells; ++i) {
    centers[2 * i] = static_cast<double>(i % g.cols) + 0.5;
    centers[2 * i + 1] = static_cast<double>(i / g.cols) + 0.5;
  }
  const Tensor probs = num::reshape(num::spatial_softmax(r.position_logits), {1, cells});
  const Tensor uv = num::matmul(probs, Tensor::constant({cells, 2}, std::move(centers)));
  r.position_cells = num::reshape(uv, {2});
  const Tensor to_m = Tensor::constant({2, 2}, {g.cell_m, 0.0, 0.0, -g.cell_m});
  const Tensor offset = Tensor::constant({2}, {-g.anchor_u * g.cell_m, g.anchor_v * g.cell_m});
  r.position_m = num::reshape(num::linear(uv, to_m, offset), {2});

  const Tensor pooled = num::mean_pool_spatial(h2);
  r.heading = num::add_scalar(num::mlp(w.heading, pooled), 0.5 * std::numbers::pi);

  r.memory = num::maximum(memory, num::bilinear_splat(r.position_cells, g.rows, g.cols));
  return r;
}

std::vector<scene::Pose> Rollout::poses() const {
  std::vector<scene::Pose> out;
  out.reserve(position_m.size());
  for (std::size_t k = 0; k < position_m.size(); ++k) {
    out.push_back({{position_m[k][0], position_m[k][1]}, heading[k].item()});
  }
  return out;
}

Network::Network(VariantConfig variant, ModelConfig config, std::uint64_t init_seed)
    : variant_(variant), config_(config) {
  num::Rng rng(init_seed);
  for (const auto& [name, shape] : parameter_layout(variant_, config_)) {
    const std::size_t n = num::numel(shape);
    std::vector<double> values;
    if (ends_with(name, ".bias") || ends_with(name, ".shift")) {
      values.assign(n, 0.0);
    } else if (ends_with(name, ".scale")) {
      values.assign(n, 1.0);
    } else if (shape.size() == 4) {
      const std::size_t area = shape[0] * shape[1];
      values = num::glorot_uniform(n, area * shape[2], area * shape[3], rng);
    } else {
      values = num::glorot_uniform(n, shape[0], shape[1], rng);
    }
    params_.add(name, Tensor::parameter(shape, std::move(values)));
  }
}

Network::Network(VariantConfig variant, ModelConfig config, num::ParameterSet params)
    : variant_(variant), config_(config), params_(std::move(params)) {
  const auto layout = parameter_layout(variant_, config_);
  if (layout.size() != params_.size()) {
    throw_invalid("variant " + variant_.to_string() + " expects " + std::to_string(layout.size()) +
                  " parameters, got " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (params_.name(i) != layout[i].first || params_[i].shape() != layout[i].second) {
      throw_invalid("parameter " + std::to_string(i) + " is " + params_.name(i) + " " +
                    num::to_string(params_[i].shape()) + ", variant expects " + layout[i].first + " " +
                    num::to_string(layout[i].second));
    }
  }
}

Tensor Network::input_channels(const scene::RasterStack& raster, std::span<const std::string> names) const {
  const std::size_t res = config_.resolution;
  if (static_cast<std::size_t>(raster.resolution) != res) {
    throw_invalid("raster resolution " + std::to_string(raster.resolution) + " does not match model " +
                  std::to_string(res));
  }
  const auto idx = raster.indices_of(names);
  const std::size_t c = idx.size();
  std::vector<double> values(res * res * c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const auto& grid = raster.channels[idx[ch]];
    for (std::size_t i = 0; i < res * res; ++i) values[i * c + ch] = grid[i];
  }
  return Tensor::constant({res, res, c}, std::move(values));
}

Tensor Network::input_all(const scene::RasterStack& raster) const {
  return input_channels(raster, raster.names);
}

Tensor Network::input_dense(const scene::RasterStack& raster) const {
  return input_channels(raster, raster.dense_subset_names);
}

Tensor Network::input_objects(const scene::RasterStack& raster) const {
  return input_channels(raster, scene::object_channel_names());
}

Tensor Network::initial_box(const scene::RasterStack& raster) const {
  const auto pooled = scene::downsample(raster.channel("current_agent_box"), raster.resolution,
                                        static_cast<int>(ModelConfig::kDownsample));
  const std::size_t n = config_.feature_resolution();
  return Tensor::constant({n, n}, pooled);
}

FeatureNetWeights Network::feature_weights(const char* prefix) const {
  const std::string pre(prefix);
  auto layer = [&](const std::string& name) { return ConvLayer{p(pre + name + ".kernel"), p(pre + name + ".bias")}; };
  FeatureNetWeights w;
  w.stage1 = layer(".stage1");
  w.stage1_skip = layer(".stage1_skip");
  w.stage2 = layer(".stage2");
  w.stage2_skip = layer(".stage2_skip");
  for (int i = 0; i < 3; ++i) w.body[i] = layer(".body" + std::to_string(i));
  return w;
}

VanillaAttentionWeights Network::vanilla_weights() const {
  return {{{p("attention.mlp0.weight"), p("attention.mlp0.bias")},
           {p("attention.mlp1.weight"), p("attention.mlp1.bias")}}};
}

AtrousAttentionWeights Network::atrous_weights(const char* prefix) const {
  const std::string pre(prefix);
  AtrousAttentionWeights w;
  for (int i = 0; i < 3; ++i) {
    const std::string b = pre + ".branch" + std::to_string(i);
    const std::string n = pre + ".norm" + std::to_string(i);
    w.branches[i] = {p(b + ".kernel"), p(b + ".bias")};
    w.norm_scale[i] = p(n + ".scale");
    w.norm_shift[i] = p(n + ".shift");
  }
  w.logits = {p(pre + ".logits.kernel"), p(pre + ".logits.bias")};
  return w;
}

std::vector<DenseLayer> Network::bottleneck_mlp() const {
  return {{p("bottleneck.mlp0.weight"), p("bottleneck.mlp0.bias")},
          {p("bottleneck.mlp1.weight"), p("bottleneck.mlp1.bias")}};
}

AgentRnnWeights Network::rnn_weights() const {
  AgentRnnWeights w;
  w.context = {p("rnn.context.kernel"), p("rnn.context.bias")};
  w.step = {p("rnn.step.kernel"), Tensor()};
  w.hidden = {p("rnn.hidden.kernel"), p("rnn.hidden.bias")};
  w.head = {p("rnn.head.kernel"), p("rnn.head.bias")};
  w.heading = {{p("rnn.heading0.weight"), p("rnn.heading0.bias")},
               {p("rnn.heading1.weight"), p("rnn.heading1.bias")}};
  return w;
}

ObjectBranchWeights Network::object_weights() const {
  return {feature_weights("feature_O"), atrous_weights("object_attention"),
          {p("object.occupancy.kernel"), p("object.occupancy.bias")}};
}

Rollout Network::rollout(const scene::RasterStack& raster, const RolloutOptions& options) const {
  Rollout out;
  const bool bottleneck = variant_.attention == AttentionMode::kBottleneck;

  Tensor f_i = feature_net(feature_weights("feature_I"), input_all(raster));
  ++out.feature_net_calls;

  if (variant_.object_branch) {
    const auto w = object_weights();
    const Tensor f_o = feature_net(w.features, input_objects(raster));
    ++out.feature_net_calls;
    const AttentionResult att = atrous_spatial_attention(w.attention, f_o);
    Tensor a_o = attended_gain(att.attended);
    if (options.zero_object_features) a_o = Tensor::zeros(a_o.shape());
    out.object_alpha = att.alpha;
    out.occupancy_logits = conv(w.occupancy, a_o);
    const std::array<Tensor, 2> parts = {f_i, a_o};
    f_i = num::concat_channels(parts);
  }

  Tensor rnn_features = f_i;
  Tensor z;
  if (variant_.attention != AttentionMode::kNone) {
    const AttentionResult att = variant_.atrous ? atrous_spatial_attention(atrous_weights("attention"), f_i)
                                                : vanilla_attention(vanilla_weights(), f_i);
    out.alpha = att.alpha;
    const Tensor attended = attended_gain(att.attended);
    if (bottleneck) {
      const Tensor basis = variant_.positional_encoding
                               ? positional_basis(attended.dim(0), attended.dim(1), config_.feature_dim)
                               : Tensor();
      const auto g = bottleneck_mlp();
      z = bottleneck_encode(g, attended, basis, config_.pool);
      if (options.zero_bottleneck) z = Tensor::zeros(z.shape());
      out.z = z;
      rnn_features = feature_net(feature_weights("feature_S"), input_dense(raster));
      ++out.feature_net_calls;
    } else {
      rnn_features = attended;
    }
  }

  const auto w = rnn_weights();
  const FeatureGeometry geometry = FeatureGeometry::from(config_);
  const Tensor context = agent_rnn_context(w, rnn_features, z);
  Tensor memory = Tensor::zeros({geometry.rows, geometry.cols});
  Tensor box = initial_box(raster);
  for (std::size_t k = 1; k <= config_.horizon; ++k) {
    RnnStepOutput step = agent_rnn_step(w, geometry, k, config_.horizon, context, memory, box);
    memory = step.memory;
    box = step.box;
    out.position_m.push_back(step.position_m);
    out.heading.push_back(step.heading);
    out.position_logits.push_back(step.position_logits);
    out.box_logits.push_back(step.box_logits);
    out.box.push_back(step.box);
    out.memory.push_back(step.memory);
  }
  return out;
}

}  // namespace attnbn::model
