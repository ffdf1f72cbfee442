#include "edgeflow/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <istream>
#include <limits>
#include <string>

#include <json.hpp>

#include "edgeflow/error.hpp"
#include "edgeflow/pnm.hpp"

namespace edgeflow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start, Clock::time_point end) {
  return std::chrono::duration<double>(end - start).count();
}

std::string dims(int w, int h) { return std::to_string(w) + "x" + std::to_string(h); }

}  // namespace

FeatureExtractor::FeatureExtractor(const CannyParams& canny, const ZoneGeometry& geometry,
                                   const ZeroTrafficReference& ref, const FilterParams& filter)
    : canny_(canny), zones_(geometry), filter_(ref, filter) {
  canny_.validate();
  if (!ref.edges.same_shape(geometry.frame_width, geometry.frame_height)) {
    throw Error("pipeline: reference " + dims(ref.edges.width(), ref.edges.height()) + " does not match geometry frame " +
                dims(geometry.frame_width, geometry.frame_height));
  }
}

ZoneCounts FeatureExtractor::extract(const RgbImage& frame, bool parallel) const {
  const ZoneGeometry& g = zones_.geometry();
  if (frame.width() != g.frame_width || frame.height() != g.frame_height) {
    throw Error("pipeline: frame " + dims(frame.width(), frame.height()) + " does not match configured " +
                dims(g.frame_width, g.frame_height));
  }
  const EdgeMap edges = edgeflow::canny(to_grayscale(frame), canny_);
  return filter_.count(edges, zones_, parallel);
}

Pipeline::Pipeline(PipelineConfig cfg, ZeroTrafficReference ref, MlpModel model)
    : cfg_(std::move(cfg)), model_(std::move(model)), features_(cfg_.canny, cfg_.geometry, ref, cfg_.filter) {
  model_.validate();
  if (!(ref.canny == cfg_.canny)) {
    throw Error("pipeline: reference was captured with different Canny settings than the config");
  }
}

Pipeline Pipeline::load(const PipelineConfig& cfg) {
  if (cfg.reference_path.empty()) throw Error("pipeline: config names no zero-traffic reference");
  if (cfg.model_path.empty()) throw Error("pipeline: config names no model");
  return Pipeline(cfg, load_reference(cfg.reference_path), load_model(cfg.model_path));
}

FrameResult Pipeline::run_frame(const RgbImage& frame) const {
  FrameResult result;
  const auto start = Clock::now();
  result.counts = features_.extract(frame, cfg_.parallel);
  const auto edges_done = Clock::now();
  result.estimate = forward(model_, FeatureVector::from_counts(result.counts));
  const auto end = Clock::now();
  result.timing.edge_detection = seconds_since(start, edges_done);
  result.timing.dnn = seconds_since(edges_done, end);
  result.timing.total = seconds_since(start, end);
  return result;
}

TimingReport summarize_timings(std::vector<StageTiming> frames, std::size_t errors) {
  TimingReport report;
  report.frames = std::move(frames);
  report.errors = errors;
  if (report.frames.empty()) return report;
  constexpr double inf = std::numeric_limits<double>::infinity();
  report.min = {inf, inf, inf, inf};
  report.max = {0.0, 0.0, 0.0, 0.0};
  auto fold = [&](double StageTiming::*field) {
    double sum = 0.0;
    for (const StageTiming& t : report.frames) {
      sum += t.*field;
      report.min.*field = std::min(report.min.*field, t.*field);
      report.max.*field = std::max(report.max.*field, t.*field);
    }
    report.mean.*field = sum / static_cast<double>(report.frames.size());
  };
  fold(&StageTiming::ingest);
  fold(&StageTiming::edge_detection);
  fold(&StageTiming::dnn);
  fold(&StageTiming::total);
  return report;
}

std::vector<std::filesystem::path> frames_in_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error("not a directory: " + dir.string());
  struct Entry {
    std::filesystem::file_time_type time;
    std::filesystem::path path;
  };
  std::vector<Entry> entries;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".ppm") continue;
    entries.push_back({e.last_write_time(), e.path()});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.path < b.path;
  });
  std::vector<std::filesystem::path> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(std::move(e.path));
  return out;
}

std::vector<std::filesystem::path> frames_from_list(std::istream& in) {
  std::vector<std::filesystem::path> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.emplace_back(line.substr(first, last - first + 1));
  }
  return out;
}

TimingReport run_stream(const Pipeline& pipeline, const std::vector<std::filesystem::path>& frames,
                        const std::function<void(const FrameRecord&)>& sink) {
  std::vector<StageTiming> timings;
  std::size_t errors = 0;
  for (const auto& path : frames) {
    FrameRecord record;
    record.frame_id = path.string();
    try {
      const auto start = Clock::now();
      const RgbImage frame = read_ppm(path);
      const auto loaded = Clock::now();
      FrameResult result = pipeline.run_frame(frame);
      const auto end = Clock::now();
      result.timing.ingest = seconds_since(start, loaded);
      result.timing.total = seconds_since(start, end);
      timings.push_back(result.timing);
      record.result = std::move(result);
    } catch (const Error& e) {
      record.error = e.what();
      ++errors;
    }
    if (sink) sink(record);
  }
  return summarize_timings(std::move(timings), errors);
}

std::string encode_record(const FrameRecord& record) {
  nlohmann::ordered_json rec;
  rec["frame"] = record.frame_id;
  rec["ok"] = record.ok();
  if (!record.ok()) {
    rec["error"] = record.error;
    return rec.dump();
  }
  const FrameResult& r = *record.result;
  rec["counts"] = {{"near", r.counts.near}, {"mid", r.counts.mid}, {"far", r.counts.far}};
  rec["distribution"] = r.estimate.class_distribution;
  rec["estimate"] = r.estimate.value;
  rec["level"] = round_half_up(r.estimate.value);
  rec["seconds"] = {{"ingest", r.timing.ingest},
                    {"edge_detection", r.timing.edge_detection},
                    {"dnn", r.timing.dnn},
                    {"total", r.timing.total}};
  return rec.dump();
}

std::string format_timing_table(const TimingReport& report) {
  struct Row {
    const char* name;
    double StageTiming::*field;
  };
  const Row rows[] = {{"Image capture", &StageTiming::ingest},
                      {"Edge-detection", &StageTiming::edge_detection},
                      {"DNN Processing", &StageTiming::dnn},
                      {"Total", &StageTiming::total}};
  std::string out = "Process        ";
  char cell[64];
  for (std::size_t i = 0; i < report.frames.size(); ++i) {
    std::snprintf(cell, sizeof cell, " %10s", ("Im" + std::to_string(i + 1) + "(s)").c_str());
    out += cell;
  }
  std::snprintf(cell, sizeof cell, " %10s\n", "Mean(s)");
  out += cell;
  for (const Row& row : rows) {
    std::snprintf(cell, sizeof cell, "%-15s", row.name);
    out += cell;
    for (const StageTiming& t : report.frames) {
      std::snprintf(cell, sizeof cell, " %10.6f", t.*row.field);
      out += cell;
    }
    std::snprintf(cell, sizeof cell, " %10.6f\n", report.mean.*row.field);
    out += cell;
  }
  return out;
}

}  // namespace edgeflow
