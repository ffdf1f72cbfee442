#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "edgeflow/config.hpp"
#include "edgeflow/dataset.hpp"
#include "edgeflow/error.hpp"
#include "edgeflow/fileio.hpp"
#include "edgeflow/mlp.hpp"
#include "edgeflow/pipeline.hpp"
#include "edgeflow/pnm.hpp"
#include "edgeflow/static_filter.hpp"
#include "edgeflow/synth.hpp"

namespace edgeflow::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Flags that override fields of the pipeline config file.
struct ConfigOverrides {
  std::string config_path;
  std::optional<double> sigma, low, high;
  std::optional<std::string> filter_mode;
  std::optional<int> kernel_radius;
  std::optional<std::string> reference, model;
  bool serial = false;

  /// `runtime` adds the flags that only matter when running the pipeline.
  void add_to(CLI::App& app, bool config_required, bool runtime) {
    auto* c = app.add_option("-c,--config", config_path,
                             config_required ? "Pipeline config file (JSON)"
                                             : "Pipeline config, needed for samples that only name an image");
    if (config_required) c->required();
    app.add_option("--sigma", sigma, "Override Gaussian sigma");
    app.add_option("--low", low, "Override Canny low threshold");
    app.add_option("--high", high, "Override Canny high threshold");
    app.add_option("--filter-mode", filter_mode, "Override static filter mode")->check(CLI::IsMember({"strict", "tolerant"}));
    app.add_option("--kernel-radius", kernel_radius, "Override tolerant-mode dilation radius");
    app.add_option("--reference", reference, "Override zero-traffic reference base path");
    if (!runtime) return;
    app.add_option("--model", model, "Override model file path");
    app.add_flag("--serial", serial, "Disable intra-frame parallelism");
  }

  bool has_config() const { return !config_path.empty(); }

  PipelineConfig load() const {
    PipelineConfig cfg = load_config(config_path);
    if (sigma) cfg.canny.gaussian_sigma = *sigma;
    if (low) cfg.canny.low_threshold = *low;
    if (high) cfg.canny.high_threshold = *high;
    if (filter_mode) cfg.filter.mode = parse_filter_mode(*filter_mode);
    if (kernel_radius) cfg.filter.kernel_radius = *kernel_radius;
    if (reference) cfg.reference_path = *reference;
    if (model) cfg.model_path = *model;
    if (serial) cfg.parallel = false;
    cfg.canny.validate();
    cfg.filter.validate();
    return cfg;
  }
};

struct TrainOverrides {
  TrainConfig cfg;

  void add_to(CLI::App& app) {
    app.add_option("--ratio", cfg.split_ratio, "Training share of the manifest")->capture_default_str();
    app.add_option("--seed", cfg.rng_seed, "Seed for weights, shuffling and the split")->capture_default_str();
    app.add_option("--lr", cfg.learning_rate, "Learning rate")->capture_default_str();
    app.add_option("--epochs", cfg.max_epochs, "Maximum number of epochs")->capture_default_str();
    app.add_option("--target-loss", cfg.target_loss, "Stop once the epoch loss reaches this value")->capture_default_str();
    app.add_option("--batch", cfg.batch_size, "Mini-batch size")->capture_default_str();
  }
};

ordered_json report_json(const AccuracyReport& r) {
  ordered_json j;
  j["count"] = r.count;
  j["exact_rate"] = r.exact_rate;
  j["within_one_rate"] = r.within_one_rate;
  j["mean_abs_error"] = r.mean_abs_error;
  return j;
}

/// Fills in missing feature vectors by running the feature extractor of
/// `cfg` over each sample's image, resolved against the manifest directory.
void featurize(Dataset& data, const fs::path& manifest_dir, const std::optional<PipelineConfig>& cfg) {
  std::optional<FeatureExtractor> fx;
  for (auto& s : data) {
    if (s.features) continue;
    if (!cfg) throw Error("manifest sample '" + s.image + "' has no features; pass --config to compute them");
    if (!fx) fx.emplace(cfg->canny, cfg->geometry, load_reference(cfg->reference_path), cfg->filter);
    fs::path image(s.image);
    if (image.is_relative()) image = manifest_dir / image;
    s.features = FeatureVector::from_counts(fx->extract(read_ppm(image), cfg->parallel));
  }
}

Dataset load_dataset(const fs::path& manifest, const ConfigOverrides& ov) {
  Dataset data = read_manifest(manifest);
  if (data.empty()) throw Error(manifest.string() + ": manifest is empty");
  std::optional<PipelineConfig> cfg;
  if (ov.has_config()) cfg = ov.load();
  featurize(data, manifest.parent_path(), cfg);
  return data;
}

void check_frame_size(const RgbImage& frame, const ZoneGeometry& g, const fs::path& path) {
  if (frame.width() != g.frame_width || frame.height() != g.frame_height) {
    throw Error(path.string() + ": frame is " + std::to_string(frame.width()) + "x" + std::to_string(frame.height()) +
                " but the config expects " + std::to_string(g.frame_width) + "x" + std::to_string(g.frame_height));
  }
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  while (!text.empty() && text.back() == ' ') text.pop_back();
  return text;
}

// --- subcommands ------------------------------------------------------------

struct CalibrateArgs {
  ConfigOverrides ov;
  std::string frame, out, capture_id;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  const PipelineConfig cfg = a.ov.load();
  const fs::path base = a.out.empty() ? cfg.reference_path : fs::path(a.out);
  if (base.empty()) throw Error("no reference path: set \"reference\" in the config or pass --out");
  const RgbImage frame = read_ppm(a.frame);
  check_frame_size(frame, cfg.geometry, a.frame);
  const std::string id = a.capture_id.empty() ? fs::path(a.frame).filename().string() : a.capture_id;
  const ZeroTrafficReference ref = make_reference(frame, cfg.canny, id);
  save_reference(ref, base);
  out << "reference " << base.string() << ": " << ref.edges.count() << " static edge pixels\n";
  return 0;
}

struct GenArgs {
  std::string out_dir;
  int count = 320;
  std::uint64_t seed = 2024;
  SynthConfig synth;
  bool no_images = false;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const fs::path dir(a.out_dir);
  const auto samples = generate_samples(a.count, {}, a.seed, a.synth);
  fs::create_directories(dir);

  SceneSpec empty;
  empty.geometry = a.synth.geometry();
  empty.lane_marks = a.synth.lane_marks;
  empty.rng_seed = a.synth.background_seed;
  const RgbImage empty_frame = render_scene(empty);
  write_ppm(dir / "empty.ppm", empty_frame);
  save_reference(make_reference(empty_frame, a.synth.canny, "empty.ppm"), dir / "reference");

  Dataset data;
  data.reserve(samples.size());
  if (!a.no_images) fs::create_directories(dir / "frames");
  for (const auto& g : samples) {
    LabeledSample s = g.sample;
    if (!a.no_images) {
      s.image = "frames/" + s.tag + ".ppm";
      write_ppm(dir / s.image, render_scene(g.spec));
    }
    data.push_back(std::move(s));
  }
  write_manifest(dir / "manifest.jsonl", data);

  PipelineConfig cfg;
  cfg.canny = a.synth.canny;
  cfg.geometry = a.synth.geometry();
  cfg.filter = a.synth.filter;
  cfg.reference_path = "reference";
  cfg.model_path = "model.bin";
  save_config(dir / "config.json", cfg);

  out << "generated " << data.size() << " scenes in " << dir.string() << "\n";
  return 0;
}

struct TrainArgs {
  ConfigOverrides ov;
  TrainOverrides train;
  std::string manifest, model_out, report_out;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  a.train.cfg.validate();
  const Dataset data = load_dataset(a.manifest, a.ov);
  const auto [train_set, test_set] = split_dataset(data, a.train.cfg.split_ratio, a.train.cfg.rng_seed);
  const TrainResult result = train(train_set, a.train.cfg);
  const AccuracyReport report = evaluate(result.model, test_set);

  ordered_json j;
  j["train_size"] = train_set.size();
  j["test_size"] = test_set.size();
  j["epochs"] = result.epoch_loss.size();
  j["final_loss"] = result.epoch_loss.back();
  j["reached_target"] = result.reached_target;
  j["test"] = report_json(report);
  const std::string text = j.dump() + "\n";

  save_model(result.model, a.model_out);
  if (!a.report_out.empty()) write_file_atomic(a.report_out, text);
  out << text;
  return 0;
}

struct EvalArgs {
  ConfigOverrides ov;
  std::string manifest, model;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Dataset data = load_dataset(a.manifest, a.ov);
  const MlpModel model = load_model(a.model);
  out << report_json(evaluate(model, data)).dump() << "\n";
  return 0;
}

struct InferArgs {
  ConfigOverrides ov;
  std::vector<std::string> frames;
  std::string dir, list, out_path;
};

std::vector<fs::path> collect_frames(const InferArgs& a, std::istream& in) {
  std::vector<fs::path> frames(a.frames.begin(), a.frames.end());
  if (!a.dir.empty()) {
    const auto listed = frames_in_directory(a.dir);
    frames.insert(frames.end(), listed.begin(), listed.end());
  }
  if (a.list == "-") {
    const auto listed = frames_from_list(in);
    frames.insert(frames.end(), listed.begin(), listed.end());
  } else if (!a.list.empty()) {
    std::ifstream file(a.list);
    if (!file) throw Error(a.list + ": cannot open frame list");
    const auto listed = frames_from_list(file);
    frames.insert(frames.end(), listed.begin(), listed.end());
  }
  return frames;
}

int cmd_infer(const InferArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  const Pipeline pipeline = Pipeline::load(a.ov.load());
  const auto frames = collect_frames(a, in);
  std::ostringstream buffer;
  std::ostream& sink = a.out_path.empty() ? out : buffer;
  const TimingReport report = run_stream(pipeline, frames, [&](const FrameRecord& r) {
    sink << encode_record(r) << "\n";
    if (!r.ok()) err << "edgeflow: warning: " << one_line(r.error) << "\n";
  });
  if (!a.out_path.empty()) write_file_atomic(a.out_path, buffer.str());
  err << "processed " << frames.size() << " frames, " << report.errors << " errors\n";
  return 0;
}

struct BenchArgs {
  ConfigOverrides ov;
  std::string dir;
  int passes = 1;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.passes < 1) throw Error("--passes must be at least 1");
  const Pipeline pipeline = Pipeline::load(a.ov.load());
  const auto frames = frames_in_directory(a.dir);
  if (frames.empty()) throw Error(a.dir + ": no .ppm frames to benchmark");

  // Per-frame timings are averaged over passes; estimates must not change.
  std::vector<StageTiming> sums(frames.size());
  std::vector<std::optional<double>> first(frames.size());
  for (int pass = 0; pass < a.passes; ++pass) {
    std::size_t i = 0;
    run_stream(pipeline, frames, [&](const FrameRecord& r) {
      if (!r.ok()) throw Error(r.frame_id + ": " + r.error);
      const double v = r.result->estimate.value;
      if (first[i] && *first[i] != v) throw Error(r.frame_id + ": estimate changed between passes");
      first[i] = v;
      const StageTiming& t = r.result->timing;
      sums[i].ingest += t.ingest;
      sums[i].edge_detection += t.edge_detection;
      sums[i].dnn += t.dnn;
      sums[i].total += t.total;
      ++i;
    });
  }
  const double n = a.passes;
  for (auto& s : sums) s = {s.ingest / n, s.edge_detection / n, s.dnn / n, s.total / n};
  out << format_timing_table(summarize_timings(sums));
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app("Traffic intensity estimation from road images", "edgeflow");
  app.require_subcommand(1);
  app.set_version_flag("--version", "edgeflow 0.1.0");

  CalibrateArgs calibrate;
  auto* c = app.add_subcommand("calibrate", "Build the zero-traffic reference from an empty-road frame");
  calibrate.ov.add_to(*c, true, false);
  c->add_option("-f,--frame", calibrate.frame, "Empty-road frame (PPM)")->required();
  c->add_option("-o,--out", calibrate.out, "Reference base path (default: config \"reference\")");
  c->add_option("--capture-id", calibrate.capture_id, "Identifier stored in the sidecar (default: frame file name)");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a labeled synthetic dataset with config and reference");
  g->add_option("-o,--out", gen.out_dir, "Output directory")->required();
  g->add_option("-n,--count", gen.count, "Number of scenes")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Scene sampling seed")->capture_default_str();
  g->add_option("--width", gen.synth.width, "Frame width")->capture_default_str();
  g->add_option("--height", gen.synth.height, "Frame height")->capture_default_str();
  g->add_option("--capacity", gen.synth.zone_capacity, "Vehicle slots per zone")->capture_default_str();
  g->add_option("--large-probability", gen.synth.large_probability, "Chance that a vehicle is large")
      ->capture_default_str();
  g->add_option("--background-seed", gen.synth.background_seed, "Seed of the static background noise")
      ->capture_default_str();
  g->add_flag("--no-images", gen.no_images, "Write features only, no frame files");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the network on a manifest and report held-out accuracy");
  tr.ov.add_to(*t, false, false);
  tr.train.add_to(*t);
  t->add_option("-m,--manifest", tr.manifest, "Labeled manifest (JSON Lines)")->required();
  t->add_option("-o,--out", tr.model_out, "Model file to write")->required();
  t->add_option("--report", tr.report_out, "Also write the accuracy report to this file");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a model against a labeled manifest");
  ev.ov.add_to(*e, false, false);
  e->add_option("-m,--manifest", ev.manifest, "Labeled manifest (JSON Lines)")->required();
  e->add_option("--model", ev.model, "Model file")->required();

  InferArgs inf;
  auto* i = app.add_subcommand("infer", "Estimate traffic intensity for frames, one JSON record per line");
  inf.ov.add_to(*i, true, true);
  i->add_option("frames", inf.frames, "Frame files (PPM)");
  i->add_option("-d,--dir", inf.dir, "Directory of frames, processed oldest first");
  i->add_option("-l,--list", inf.list, "File listing frame paths, one per line ('-' for stdin)");
  i->add_option("-o,--out", inf.out_path, "Write records here instead of stdout");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time each pipeline stage over a directory of frames");
  bench.ov.add_to(*b, true, true);
  b->add_option("-d,--dir", bench.dir, "Directory of frames (PPM)")->required();
  b->add_option("-n,--passes", bench.passes, "Passes over the frames")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& h) {
    return app.exit(h, out, err);
  } catch (const CLI::CallForVersion& v) {
    return app.exit(v, out, err);
  } catch (const CLI::ParseError& p) {
    err << "edgeflow: error: " << one_line(p.what()) << "\n";
    return 2;
  }

  try {
    if (c->parsed()) return cmd_calibrate(calibrate, out);
    if (g->parsed()) return cmd_gen(gen, out);
    if (t->parsed()) return cmd_train(tr, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (i->parsed()) return cmd_infer(inf, in, out, err);
    if (b->parsed()) return cmd_bench(bench, out);
  } catch (const std::exception& ex) {
    err << "edgeflow: error: " << one_line(ex.what()) << "\n";
    return 1;
  }
  return 1;
}

}  // namespace edgeflow::cli
