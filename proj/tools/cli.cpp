#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "attnbn/error.hpp"
#include "attnbn/eval/counterfactual.hpp"
#include "attnbn/eval/report.hpp"
#include "attnbn/eval/upsample.hpp"
#include "attnbn/model/checkpoint.hpp"
#include "attnbn/scene/corpus.hpp"
#include "attnbn/scene/dataset.hpp"
#include "attnbn/scene/generator.hpp"
#include "attnbn/train/trainer.hpp"
#include "images.hpp"

#ifndef ATTNBN_VERSION
#define ATTNBN_VERSION "unknown"
#endif

namespace attnbn::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kDefaultGrid = {"A", "B", "bottleneck-atrous", "bottleneck-pe", "bottleneck",
                                               "bottleneck+object"};

fs::path default_out(const std::string& command) {
  const char* root = std::getenv("ATTNBN_OUT");
  return fs::path(root && *root ? root : "attnbn_out") / command;
}

class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args) : command_(std::move(command)) {
    for (const auto& a : args) argv_ += (argv_.empty() ? "" : " ") + a;
  }
  template <typename T>
  void set(const std::string& key, const T& value) {
    std::ostringstream s;
    s << std::setprecision(17) << value;
    entries_.emplace_back(key, s.str());
  }
  void write(const fs::path& path) const {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write manifest '" + path.string() + "'");
    out << "attnbn " << ATTNBN_VERSION << "\ncommand=" << command_ << "\nargv=" << argv_ << '\n';
    for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
    if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
  }

 private:
  std::string command_;
  std::string argv_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

model::ModelConfig model_config_for(const scene::DatasetHeader& h) {
  model::ModelConfig c;
  c.input_channels = h.channels.size();
  c.dense_channels = h.dense_channels.size();
  c.resolution = static_cast<std::size_t>(h.grid.resolution);
  c.field_of_view_m = h.grid.field_of_view_m;
  c.horizon = h.horizon;
  return c;
}

struct LoadedData {
  scene::DatasetHeader header;
  std::vector<scene::Example> examples;
};

LoadedData load_data(const fs::path& path) {
  scene::DatasetReader reader(path);
  LoadedData d{reader.header(), {}};
  d.examples.reserve(reader.size());
  for (std::size_t i = 0; i < reader.size(); ++i) d.examples.push_back(reader.read(i));
  return d;
}

scene::GridConfig grid_of(const model::ModelConfig& c) {
  scene::GridConfig g;
  g.field_of_view_m = c.field_of_view_m;
  g.resolution = static_cast<int>(c.resolution);
  return g;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string numbered(const char* stem, std::size_t i, const char* ext) {
  std::ostringstream s;
  s << stem << '_' << std::setw(4) << std::setfill('0') << i << ext;
  return s.str();
}

// --- generate ---------------------------------------------------------------

struct GenerateOptions {
  std::string kind_mix;
  std::size_t count = 100;
  std::uint64_t seed = 1;
  std::string out;
  int resolution = 64;
  double fov = 16.0;
};

int cmd_generate(const GenerateOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto mix = o.kind_mix.empty() ? scene::KindMix::uniform() : scene::KindMix::parse(o.kind_mix);
  scene::GridConfig grid;
  grid.resolution = o.resolution;
  grid.field_of_view_m = o.fov;
  grid.validate();
  const fs::path path = o.out.empty() ? default_out("generate") / "dataset.abds" : fs::path(o.out);

  Manifest m("generate", args);
  m.set("kind_mix", o.kind_mix.empty() ? std::string("uniform") : o.kind_mix);
  m.set("count", o.count);
  m.set("seed", o.seed);
  m.set("resolution", o.resolution);
  m.set("field_of_view_m", o.fov);
  m.set("out", path.string());
  m.write(fs::path(path.string() + ".manifest.txt"));

  const auto examples = scene::generate_examples(mix, o.count, o.seed, grid);
  scene::write_dataset(examples, grid, path);
  std::map<std::string, std::size_t> counts;
  for (auto kind : scene::kAllScenarioKinds) counts[std::string(scene::to_string(kind))] = 0;
  for (const auto& ex : examples) ++counts[std::string(scene::to_string(ex.kind))];
  out << "wrote " << examples.size() << " examples to " << path.string() << '\n';
  for (const auto& [kind, n] : counts) out << "  " << kind << ": " << n << '\n';
  return kExitOk;
}

// --- train ------------------------------------------------------------------

struct TrainOptions {
  std::string data;
  std::string variant = model::full_bottleneck().to_string();
  std::size_t steps = 500;
  std::size_t batch = 8;
  double lr = 1e-3;
  double decay = 0.9999;
  std::uint64_t seed = 1;
  std::size_t checkpoint_every = 0;
  std::string out_dir;
};

void describe_train(Manifest& m, const TrainOptions& o, const fs::path& dir) {
  m.set("data", o.data);
  m.set("variant", o.variant);
  m.set("steps", o.steps);
  m.set("batch", o.batch);
  m.set("lr", o.lr);
  m.set("decay", o.decay);
  m.set("seed", o.seed);
  m.set("checkpoint_every", o.checkpoint_every);
  m.set("out_dir", dir.string());
}

train::TrainConfig train_config(const TrainOptions& o, const model::VariantConfig& variant,
                                const model::ModelConfig& model, const fs::path& dir) {
  train::TrainConfig c;
  c.variant = variant;
  c.model = model;
  c.steps = o.steps;
  c.batch_size = o.batch;
  c.learning_rate = o.lr;
  c.decay = o.decay;
  c.seed = o.seed;
  c.checkpoint_every = o.checkpoint_every;
  c.out_dir = dir;
  return c;
}

int cmd_train(const TrainOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto variant = model::VariantConfig::parse(o.variant);
  const fs::path dir = o.out_dir.empty() ? default_out("train") : fs::path(o.out_dir);
  Manifest m("train", args);
  describe_train(m, o, dir);
  m.write(dir / "manifest.txt");

  const auto data = load_data(o.data);
  const auto config = train_config(o, variant, model_config_for(data.header), dir);
  const auto result = train::train(config, data.examples);
  out << "trained " << variant.to_string() << " for " << o.steps << " steps";
  if (!result.log.empty()) out << ", final batch loss " << fixed(result.log.back().loss.total);
  out << "\ncheckpoint: " << (dir / "final.abck").string() << '\n';
  return kExitOk;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateOptions {
  std::string checkpoint;
  std::string data;
  std::string label;
  std::string out_dir;
};

int cmd_evaluate(const EvaluateOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const fs::path dir = o.out_dir.empty() ? default_out("evaluate") : fs::path(o.out_dir);
  Manifest m("evaluate", args);
  m.set("checkpoint", o.checkpoint);
  m.set("data", o.data);
  m.set("out_dir", dir.string());
  m.write(dir / "manifest.txt");

  const auto ck = model::load_checkpoint(o.checkpoint);
  const auto data = load_data(o.data);
  const std::string label = o.label.empty() ? ck.network.variant().to_string() : o.label;
  const auto e = eval::evaluate(ck.network, data.examples, label);
  const std::vector<eval::MetricsRow> rows = {e.row};
  eval::write_metrics_csv(rows, dir / "metrics.csv");
  out << label << ": ade " << fixed(e.row.ade) << " fde " << fixed(e.row.fde) << " collision "
      << fixed(e.row.collision) << " entropy " << (e.row.entropy ? fixed(*e.row.entropy) : std::string("-")) << '\n';
  return kExitOk;
}

// --- ablate -----------------------------------------------------------------

struct AblateOptions {
  std::vector<std::string> grid;
  std::vector<std::string> variants;
  std::string train_data;
  std::string test_data;
  TrainOptions train;
  bool baseline = false;
  std::size_t histogram_bins = 50;
};

int cmd_ablate(const AblateOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  std::vector<std::pair<std::string, model::VariantConfig>> entries;
  for (const auto& label : o.grid) entries.emplace_back(label, model::VariantConfig::parse(variant_for_label(label)));
  for (const auto& v : o.variants) entries.emplace_back(v, model::VariantConfig::parse(v));
  if (entries.empty()) {
    for (const auto& label : kDefaultGrid) entries.emplace_back(label, model::VariantConfig::parse(variant_for_label(label)));
  }
  const fs::path dir = o.train.out_dir.empty() ? default_out("ablate") : fs::path(o.train.out_dir);
  Manifest m("ablate", args);
  std::string labels;
  for (const auto& [label, v] : entries) labels += (labels.empty() ? "" : ";") + label + "=" + v.to_string();
  m.set("grid", labels);
  m.set("train_data", o.train_data);
  m.set("test_data", o.test_data);
  describe_train(m, o.train, dir);
  m.set("baseline", o.baseline);
  m.write(dir / "manifest.txt");

  const auto train_data = load_data(o.train_data);
  const auto test_data = load_data(o.test_data);
  const auto model_cfg = model_config_for(train_data.header);

  std::vector<eval::MetricsRow> rows;
  std::vector<std::pair<std::string, std::vector<double>>> alphas;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [label, variant] = entries[i];
    const fs::path vdir = dir / ("variant" + std::to_string(i));
    const auto result = train::train(train_config(o.train, variant, model_cfg, vdir), train_data.examples);
    auto e = eval::evaluate(result.network, test_data.examples, label);
    rows.push_back(e.row);
    if (!e.alpha_values.empty()) alphas.emplace_back(label, std::move(e.alpha_values));
    out << label << " (" << variant.to_string() << ") done\n";
  }
  if (o.baseline) rows.push_back(eval::evaluate_constant_velocity(test_data.examples).row);
  eval::write_metrics_csv(rows, dir / "metrics.csv");
  if (!alphas.empty()) {
    std::vector<eval::HistogramSeries> series;
    double upper = 0.0;
    for (const auto& [label, values] : alphas) {
      series.push_back({label, values});
      for (double v : values) upper = std::max(upper, v);
    }
    eval::write_histogram_csv(series, o.histogram_bins, upper > 0 ? upper : 1.0, dir / "attention_histogram.csv");
  }

  out << std::left << std::setw(22) << "variant" << std::setw(10) << "ADE" << std::setw(10) << "FDE"
      << std::setw(11) << "collision" << "entropy\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(22) << r.variant << std::setw(10) << fixed(r.ade) << std::setw(10) << fixed(r.fde)
        << std::setw(11) << fixed(r.collision) << (r.entropy ? fixed(*r.entropy) : std::string("")) << '\n';
  }
  out << "metrics: " << (dir / "metrics.csv").string() << '\n';
  return kExitOk;
}

// --- explain ----------------------------------------------------------------

struct ExplainOptions {
  std::string checkpoint;
  std::string data;
  std::string out_dir;
  std::size_t first = 0;
  std::size_t limit = 0;  // 0 = through the end
};

int cmd_explain(const ExplainOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const fs::path dir = o.out_dir.empty() ? default_out("explain") : fs::path(o.out_dir);
  Manifest m("explain", args);
  m.set("checkpoint", o.checkpoint);
  m.set("data", o.data);
  m.set("first", o.first);
  m.set("limit", o.limit);
  m.set("out_dir", dir.string());
  m.write(dir / "manifest.txt");

  const auto ck = model::load_checkpoint(o.checkpoint);
  if (ck.network.variant().attention == model::AttentionMode::kNone) {
    throw Error(ErrorCode::kUnsupportedVariant, "explain: checkpoint variant " + ck.network.variant().to_string() +
                                                    " has no attention map");
  }
  scene::DatasetReader reader(o.data);
  const std::size_t end = o.limit == 0 ? reader.size() : std::min(reader.size(), o.first + o.limit);
  num::NoGradGuard guard;
  std::size_t written = 0;
  for (std::size_t i = o.first; i < end; ++i) {
    const auto ex = reader.read(i);
    const auto rollout = ck.network.rollout(ex.raster);
    const std::size_t side = static_cast<std::size_t>(ex.raster.resolution);
    const auto up = eval::upsample_pyramid(rollout.alpha.values(), rollout.alpha.dim(0), rollout.alpha.dim(1), side, side);
    write_pgm(dir / numbered("attention", i, ".pgm"), side, side, heatmap_gray(up));
    write_ppm(dir / numbered("overlay", i, ".ppm"), side, side, overlay_rgb(ex.raster, up));
    ++written;
  }
  out << "wrote " << written << " attention maps to " << dir.string() << '\n';
  return kExitOk;
}

// --- counterfactual ---------------------------------------------------------

struct CounterfactualOptions {
  std::string checkpoint;
  std::string kind;
  std::uint64_t seed = 1;
  std::string mutation = "identity";
  std::string out_dir;
};

int cmd_counterfactual(const CounterfactualOptions& o, const std::vector<std::string>& args, std::ostream& out) {
  const fs::path dir = o.out_dir.empty() ? default_out("counterfactual") : fs::path(o.out_dir);
  Manifest m("counterfactual", args);
  m.set("checkpoint", o.checkpoint);
  m.set("kind", o.kind);
  m.set("seed", o.seed);
  m.set("mutation", o.mutation);
  m.set("out_dir", dir.string());
  m.write(dir / "manifest.txt");

  const auto mutation = eval::Mutation::parse(o.mutation);
  const auto scene = scene::generate_scenario(scene::parse_scenario_kind(o.kind), o.seed);
  const auto ck = model::load_checkpoint(o.checkpoint);
  const auto grid = grid_of(ck.network.config());
  const auto r = eval::counterfactual(ck.network, scene, mutation, grid);
  const auto mutated = eval::apply_mutation(scene, mutation);
  const std::size_t side = static_cast<std::size_t>(grid.resolution);
  write_ppm(dir / "original_overlay.ppm", side, side, overlay_rgb(scene::rasterize(scene, grid), r.alpha_original));
  write_ppm(dir / "mutated_overlay.ppm", side, side, overlay_rgb(scene::rasterize(mutated, grid), r.alpha_mutated));
  write_pgm(dir / "delta_attention.pgm", side, side, signed_gray(r.delta_alpha));

  std::ostringstream line;
  line << std::setprecision(6) << "mutation=" << mutation.to_string() << " mass_original=" << r.mass_original
       << " mass_mutated=" << r.mass_mutated << " delta_mass=" << r.mass_mutated - r.mass_original
       << " trajectory_ade=" << r.trajectory_ade;
  std::ofstream report(dir / "report.txt");
  report << line.str() << '\n';
  if (!report) throw Error(ErrorCode::kIo, "cannot write counterfactual report");
  out << line.str() << '\n';
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kScenarioGeneration:
      return kExitInvalidArgument;
    case ErrorCode::kIo:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kTruncated:
    case ErrorCode::kChecksum:
      return kExitIo;
    case ErrorCode::kDivergence:
    case ErrorCode::kNonFinite:
      return kExitDivergence;
    case ErrorCode::kUnsupportedVariant:
      return kExitUnsupportedVariant;
  }
  return kExitOther;
}

void add_train_flags(CLI::App* app, TrainOptions& o, bool with_variant) {
  if (with_variant) app->add_option("--variant", o.variant, "Variant flags, e.g. attention=bottleneck,atrous=on,pe=on");
  app->add_option("--steps", o.steps, "Optimizer steps")->check(CLI::NonNegativeNumber);
  app->add_option("--batch", o.batch, "Examples per step")->check(CLI::PositiveNumber);
  app->add_option("--lr", o.lr, "Base learning rate")->check(CLI::PositiveNumber);
  app->add_option("--decay", o.decay, "Learning-rate decay per step");
  app->add_option("--seed", o.seed, "Seed for initialization and shuffling");
  app->add_option("--checkpoint-every", o.checkpoint_every, "Checkpoint cadence in steps (0 = final only)");
  app->add_option("--out-dir", o.out_dir, "Output directory (default $ATTNBN_OUT/<command>)");
}

}  // namespace

std::string variant_for_label(const std::string& label) {
  if (label == "A") return "attention=none";
  if (label == "B") return "attention=vanilla";
  if (label == "bottleneck-atrous") return "attention=bottleneck,atrous=off,pe=on";
  if (label == "bottleneck-pe") return "attention=bottleneck,atrous=on,pe=off";
  if (label == "bottleneck") return "attention=bottleneck,atrous=on,pe=on";
  if (label == "bottleneck+object") return "attention=bottleneck,atrous=on,pe=on,object=on";
  throw_invalid("unknown ablation label '" + label + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-bottleneck driving model: data, training, evaluation and explanations"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic scene dataset");
  g->add_option("--kind-mix", gen.kind_mix, "Weights per kind, e.g. stop_sign=1,straight=0.5 (default uniform)");
  g->add_option("--count", gen.count, "Number of examples");
  g->add_option("--seed", gen.seed, "Corpus seed");
  g->add_option("--out", gen.out, "Dataset file");
  g->add_option("--resolution", gen.resolution, "Grid pixels per side");
  g->add_option("--fov", gen.fov, "Grid field of view in meters");

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train one variant");
  t->add_option("--data", tr.data, "Training dataset")->required();
  add_train_flags(t, tr, true);

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Held-out metrics of a checkpoint");
  e->add_option("--checkpoint", ev.checkpoint)->required();
  e->add_option("--data", ev.data)->required();
  e->add_option("--label", ev.label, "Row label (default: variant string)");
  e->add_option("--out-dir", ev.out_dir);

  AblateOptions ab;
  auto* a = app.add_subcommand("ablate", "Train and evaluate a grid of variants under one budget");
  a->add_option("--grid", ab.grid, "Labels: A,B,bottleneck-atrous,bottleneck-pe,bottleneck,bottleneck+object")
      ->delimiter(',');
  a->add_option("--variant", ab.variants, "Extra variant strings (repeatable)");
  a->add_option("--train-data", ab.train_data)->required();
  a->add_option("--test-data", ab.test_data)->required();
  a->add_flag("--baseline", ab.baseline, "Append a constant-velocity row");
  add_train_flags(a, ab.train, false);

  ExplainOptions ex;
  auto* x = app.add_subcommand("explain", "Export attention heatmaps and overlays");
  x->add_option("--checkpoint", ex.checkpoint)->required();
  x->add_option("--data", ex.data)->required();
  x->add_option("--out-dir", ex.out_dir);
  x->add_option("--first", ex.first, "First example index");
  x->add_option("--limit", ex.limit, "Number of examples (0 = all)");

  CounterfactualOptions cf;
  auto* c = app.add_subcommand("counterfactual", "Compare attention and trajectory under a scene mutation");
  c->add_option("--checkpoint", cf.checkpoint)->required();
  c->add_option("--kind", cf.kind, "Scenario kind of the scene")->required();
  c->add_option("--seed", cf.seed, "Scenario seed");
  c->add_option("--mutation", cf.mutation, "identity | remove_objects | remove_object:<id> | set_light:<id>=<state> | remove_sign[:<id>]");
  c->add_option("--out-dir", cf.out_dir);

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(rest);
  } catch (const CLI::ParseError& pe) {
    std::ostringstream o, er;
    const int code = app.exit(pe, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitInvalidArgument;
  }

  try {
    if (*g) return cmd_generate(gen, args, out);
    if (*t) return cmd_train(tr, args, out);
    if (*e) return cmd_evaluate(ev, args, out);
    if (*a) return cmd_ablate(ab, args, out);
    if (*x) return cmd_explain(ex, args, out);
    if (*c) return cmd_counterfactual(cf, args, out);
  } catch (const Error& error) {
    err << "error: " << error.what() << '\n';
    return exit_code_for(error.code());
  } catch (const fs::filesystem_error& error) {
    err << "error: " << error.what() << '\n';
    return kExitIo;
  } catch (const std::exception& error) {
    err << "error: " << error.what() << '\n';
    return kExitOther;
  }
  return kExitOther;
}

}  // namespace attnbn::cli
