#pragma once

#include <filesystem>
#include <string>

#include "edgeflow/pipeline.hpp"

namespace edgeflow {

/// Pipeline configuration as JSON:
///
///   {
///     "canny":     {"sigma": 1.4, "low": 50, "high": 100},
///     "geometry":  {"width": 640, "height": 480,
///                   "road_polygon": [[x, y], ...],
///                   "near": [row_start, row_end], "mid": [...], "far": [...]},
///     "filter":    {"kernel_radius": 1, "mode": "tolerant"},
///     "reference": "reference",     // base path of reference .pgm/.json
///     "model":     "model.bin",
///     "parallel":  true
///   }
///
/// Every section is optional except "geometry". Relative paths are resolved
/// against `base_dir`.
PipelineConfig decode_config(const std::string& text, const std::filesystem::path& base_dir = {});
std::string encode_config(const PipelineConfig& cfg);

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& cfg);

}  // namespace edgeflow
