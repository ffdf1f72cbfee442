#pragma once

#include <cstdint>
#include <vector>

#include "edgeflow/canny.hpp"
#include "edgeflow/dataset.hpp"
#include "edgeflow/image.hpp"
#include "edgeflow/rng.hpp"
#include "edgeflow/static_filter.hpp"
#include "edgeflow/zones.hpp"

namespace edgeflow {

enum class SizeClass { small, large };

struct Vehicle {
  Zone zone = Zone::near;
  SizeClass size = SizeClass::small;
  /// Center position as fractions of the road span (x) and band height (y).
  double offset_x = 0.5;
  double offset_y = 0.5;
  std::uint64_t texture_seed = 0;

  bool operator==(const Vehicle&) const = default;
};

/// A synthetic camera frame: road, optional lane marks, vehicles.
struct SceneSpec {
  ZoneGeometry geometry;
  std::vector<Vehicle> vehicles;
  bool lane_marks = true;
  /// Seeds the low-amplitude background noise. Scenes meant to share a
  /// zero-traffic reference must share this seed.
  std::uint64_t rng_seed = 1;
  /// Vehicles per zone the sampler will place; rendering does not enforce it.
  int zone_capacity = 4;

  int width() const noexcept { return geometry.frame_width; }
  int height() const noexcept { return geometry.frame_height; }

  bool operator==(const SceneSpec&) const = default;
};

/// Trapezoidal road narrowing toward the top of the frame, with far/mid/near
/// bands stacked top to bottom.
ZoneGeometry default_geometry(int width = 640, int height = 480);

struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;  // exclusive
  int y1 = 0;  // exclusive
};

/// Image-space rectangle a vehicle occupies. Throws if it leaves the frame.
PixelRect vehicle_rect(const SceneSpec& spec, const Vehicle& vehicle);

/// Deterministic rendering; equal specs give byte-identical images.
RgbImage render_scene(const SceneSpec& spec);

/// The same scene with every vehicle removed.
SceneSpec empty_scene(const SceneSpec& spec);

/// Monotone scoring lookup standing in for the expert annotator.
///
///   level 5  every zone holds >= min_per_zone_for_top vehicles and at least
///            one large vehicle is in the near or mid zone
///   level 1  at most level1_max_vehicles vehicles, none large, none near
///   else     score = sum of per-vehicle weights (far small vehicles weigh
///            more than near/mid ones; large vehicles weigh most in near/mid)
///            score < level3_score -> 2, < level4_score -> 3, otherwise 4
///   cap      scenes whose only vehicles are small ones in the near zone are
///            capped at small_near_only_cap
struct OracleLabelRules {
  double small_near = 1.0;
  double small_mid = 1.0;
  double small_far = 1.5;
  double large_near = 3.0;
  double large_mid = 3.0;
  double large_far = 2.5;
  double level3_score = 3.0;
  double level4_score = 6.0;
  int min_per_zone_for_top = 2;
  int level1_max_vehicles = 2;
  int small_near_only_cap = 3;

  double weight(Zone zone, SizeClass size) const noexcept;
  void validate() const;
};

int oracle_label(const SceneSpec& spec, const OracleLabelRules& rules = {});

struct SynthConfig {
  int width = 640;
  int height = 480;
  bool lane_marks = true;
  int zone_capacity = 4;
  double large_probability = 0.35;
  std::uint64_t background_seed = 1;
  CannyParams canny;
  FilterParams filter;

  ZoneGeometry geometry() const { return default_geometry(width, height); }
};

/// Draws one scene: a density level picks the per-zone vehicle counts, each
/// vehicle gets a free slot, size class and texture.
SceneSpec sample_scene(Rng& rng, const SynthConfig& cfg);

struct GeneratedSample {
  SceneSpec spec;
  LabeledSample sample;
};

/// Samples, renders and featurizes `n` scenes (Canny, static filter against
/// the empty-scene reference, zone counts) and labels them with the oracle.
/// Tags are "synth-NNNN".
std::vector<GeneratedSample> generate_samples(int n, const OracleLabelRules& rules, std::uint64_t seed,
                                              const SynthConfig& cfg = {});

Dataset generate_dataset(int n, const OracleLabelRules& rules, std::uint64_t seed, const SynthConfig& cfg = {});

}  // namespace edgeflow
