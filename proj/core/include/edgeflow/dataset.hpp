#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgeflow/zones.hpp"

namespace edgeflow {

/// Per-zone vehicular edge-pixel counts fed to the network.
struct FeatureVector {
  std::uint64_t near = 0;
  std::uint64_t mid = 0;
  std::uint64_t far = 0;

  static FeatureVector from_counts(const ZoneCounts& counts) noexcept {
    return {counts.near, counts.mid, counts.far};
  }

  bool operator==(const FeatureVector&) const = default;
};

inline constexpr int kMinLevel = 1;
inline constexpr int kMaxLevel = 5;

inline bool valid_level(int level) noexcept { return level >= kMinLevel && level <= kMaxLevel; }

/// One manifest record. A record carries inline features, an image path, or
/// both; training needs features, which the CLI derives from the image when
/// absent.
struct LabeledSample {
  std::optional<FeatureVector> features;
  std::string image;
  int label = kMinLevel;
  std::string tag;

  bool operator==(const LabeledSample&) const = default;
};

using Dataset = std::vector<LabeledSample>;

/// Manifest: JSON Lines, one object per sample:
///   {"features":[near,mid,far],"image":"frames/0001.ppm","label":3,"tag":"synth-0001"}
/// "label" is required; at least one of "features"/"image" must be present.
/// Blank lines and lines starting with '#' are skipped.
std::string encode_manifest(const Dataset& data);
Dataset decode_manifest(const std::string& text);

Dataset read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Dataset& data);

/// Seeded shuffle, then the first round(ratio * N) samples train and the
/// rest test. Throws for N < 2, ratio outside (0, 1), or a split that
/// leaves either side empty.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double ratio, std::uint64_t seed);

}  // namespace edgeflow
