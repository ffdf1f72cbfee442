#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "edgeflow/canny.hpp"
#include "edgeflow/image.hpp"
#include "edgeflow/mlp.hpp"
#include "edgeflow/static_filter.hpp"
#include "edgeflow/zones.hpp"

namespace edgeflow {

struct PipelineConfig {
  CannyParams canny;
  ZoneGeometry geometry;
  FilterParams filter;
  std::filesystem::path reference_path;  // base path, without .pgm/.json
  std::filesystem::path model_path;
  bool parallel = true;
};

/// Seconds spent per stage of one frame. Static filtering and zone counting
/// are billed to edge_detection; dnn covers the forward pass only.
struct StageTiming {
  double ingest = 0.0;
  double edge_detection = 0.0;
  double dnn = 0.0;
  double total = 0.0;
};

/// Frame to zone counts: grayscale, Canny, static filter, per-zone count.
class FeatureExtractor {
 public:
  FeatureExtractor(const CannyParams& canny, const ZoneGeometry& geometry, const ZeroTrafficReference& ref,
                   const FilterParams& filter);

  /// Throws on frame size mismatch.
  ZoneCounts extract(const RgbImage& frame, bool parallel = false) const;

  const ZoneGeometry& geometry() const noexcept { return zones_.geometry(); }
  const CannyParams& canny() const noexcept { return canny_; }

 private:
  CannyParams canny_;
  ZoneMasks zones_;
  StaticEdgeFilter filter_;
};

struct FrameResult {
  ZoneCounts counts;
  IntensityEstimate estimate;
  StageTiming timing;
};

class Pipeline {
 public:
  /// Validates that reference, geometry and model agree.
  Pipeline(PipelineConfig cfg, ZeroTrafficReference ref, MlpModel model);

  /// Loads the reference and model named in the config.
  static Pipeline load(const PipelineConfig& cfg);

  const PipelineConfig& config() const noexcept { return cfg_; }
  const MlpModel& model() const noexcept { return model_; }

  void set_parallel(bool parallel) noexcept { cfg_.parallel = parallel; }

  /// Throws on frame size mismatch; no partial result.
  FrameResult run_frame(const RgbImage& frame) const;

 private:
  PipelineConfig cfg_;
  MlpModel model_;
  FeatureExtractor features_;
};

struct FrameRecord {
  std::string frame_id;
  std::optional<FrameResult> result;
  std::string error;

  bool ok() const noexcept { return result.has_value(); }
};

struct TimingReport {
  std::vector<StageTiming> frames;
  StageTiming mean;
  StageTiming min;
  StageTiming max;
  std::size_t errors = 0;
};

TimingReport summarize_timings(std::vector<StageTiming> frames, std::size_t errors = 0);

/// Frame files of a directory (.ppm), ordered by modification time, then name.
std::vector<std::filesystem::path> frames_in_directory(const std::filesystem::path& dir);

/// One path per non-empty line.
std::vector<std::filesystem::path> frames_from_list(std::istream& in);

/// Decodes and processes each frame in order, timing decode as ingest. A frame
/// that fails to load or process yields an error record and the stream
/// continues.
TimingReport run_stream(const Pipeline& pipeline, const std::vector<std::filesystem::path>& frames,
                        const std::function<void(const FrameRecord&)>& sink);

/// One JSON object per line: frame, ok, counts, distribution, estimate,
/// per-stage seconds (or error).
std::string encode_record(const FrameRecord& record);

/// Stage-by-frame table: one column per frame plus a mean column.
std::string format_timing_table(const TimingReport& report);

}  // namespace edgeflow
