#include "edgeflow/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "edgeflow/error.hpp"
#include "edgeflow/pipeline.hpp"

namespace edgeflow {

ZoneGeometry default_geometry(int width, int height) {
  if (width < 16 || height < 16) throw Error("synth: frame must be at least 16x16");
  const double w = width;
  const double h = height;
  auto row = [&](double frac) { return static_cast<int>(std::lround(frac * h)); };
  ZoneGeometry g;
  g.frame_width = width;
  g.frame_height = height;
  g.road_polygon = {{0.06 * w, h}, {0.94 * w, h}, {0.60 * w, 0.22 * h}, {0.40 * w, 0.22 * h}};
  g.far_band = {row(0.25), row(0.45)};
  g.mid_band = {row(0.45), row(0.68)};
  g.near_band = {row(0.68), height};
  return g;
}

namespace {

constexpr Rgb kOffRoad{50, 76, 40};
constexpr Rgb kRoad{118, 118, 118};
constexpr Rgb kLaneMark{215, 215, 215};

constexpr std::array<Rgb, 8> kBodyColors{{
    {200, 30, 35},    // red
    {235, 235, 230},  // white
    {30, 60, 170},    // blue
    {230, 200, 40},   // yellow
    {25, 25, 28},     // black
    {20, 90, 50},     // dark green
    {235, 120, 20},   // orange
    {175, 180, 190},  // silver
}};

/// Horizontal extent of the road polygon at the center of `row`.
std::pair<double, double> road_span(const ZoneGeometry& g, double y) {
  double lo = g.frame_width;
  double hi = 0.0;
  const auto& poly = g.road_polygon;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > y) != (b.y > y)) {
      const double x = (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (hi < lo) return {0.0, 0.0};
  return {lo, hi};
}

std::uint8_t clamp_u8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

Rgb shade(Rgb c, int delta) { return {clamp_u8(c.r + delta), clamp_u8(c.g + delta), clamp_u8(c.b + delta)}; }

void fill_rect(RgbImage& img, int x0, int y0, int x1, int y1, Rgb c) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, img.width());
  y1 = std::min(y1, img.height());
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) img.set(x, y, c);
  }
}

int luma(Rgb c) { return (299 * c.r + 587 * c.g + 114 * c.b) / 1000; }

/// Bus/truck-like body: windshield, panel grid, wheels.
void draw_large(RgbImage& img, const PixelRect& r, Rng& rng) {
  const Rgb body = kBodyColors[static_cast<std::size_t>(rng.integer(0, kBodyColors.size() - 1))];
  const int w = r.x1 - r.x0;
  const int h = r.y1 - r.y0;
  fill_rect(img, r.x0, r.y0, r.x1, r.y1, body);

  const int contrast = luma(body) > 128 ? -45 : 45;
  const int cols = static_cast<int>(rng.integer(3, 4));
  const int rows = static_cast<int>(rng.integer(2, 3));
  const int top = r.y0 + h * 3 / 10;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      if ((i + j) % 2 != 0) continue;
      const int px0 = r.x0 + w * i / cols + 1;
      const int px1 = r.x0 + w * (i + 1) / cols - 1;
      const int py0 = top + (r.y1 - top) * j / rows + 1;
      const int py1 = top + (r.y1 - top) * (j + 1) / rows - 1;
      fill_rect(img, px0, py0, px1, py1, shade(body, contrast));
    }
  }
  const Rgb glass{40, 55, 70};
  fill_rect(img, r.x0 + w / 8, r.y0 + h / 12, r.x1 - w / 8, r.y0 + h * 1 / 4, glass);
  const int wheel_w = std::max(2, w / 7);
  const int wheel_h = std::max(2, h / 8);
  fill_rect(img, r.x0 + w / 10, r.y1 - wheel_h, r.x0 + w / 10 + wheel_w, r.y1, {15, 15, 15});
  fill_rect(img, r.x1 - w / 10 - wheel_w, r.y1 - wheel_h, r.x1 - w / 10, r.y1, {15, 15, 15});
}

/// Motorcycle/three-wheeler-like body with busy, high-contrast detail.
void draw_small(RgbImage& img, const PixelRect& r, Rng& rng) {
  const Rgb body = kBodyColors[static_cast<std::size_t>(rng.integer(0, kBodyColors.size() - 1))];
  fill_rect(img, r.x0, r.y0, r.x1, r.y1, body);
  const int w = r.x1 - r.x0;
  const int h = r.y1 - r.y0;
  const int cell = std::max(3, std::min(w, h) / 4);
  for (int y = r.y0 + 1; y + cell <= r.y1 - 1; y += cell) {
    for (int x = r.x0 + 1; x + cell <= r.x1 - 1; x += cell) {
      if (rng.chance(0.5)) {
        const int delta = rng.chance(0.5) ? 70 : -70;
        fill_rect(img, x, y, x + cell - 1, y + cell - 1, shade(body, delta));
      }
    }
  }
}

}  // namespace

PixelRect vehicle_rect(const SceneSpec& spec, const Vehicle& v) {
  if (!(v.offset_x >= 0.0 && v.offset_x <= 1.0 && v.offset_y >= 0.0 && v.offset_y <= 1.0)) {
    throw Error("synth: vehicle offsets must lie in [0, 1]");
  }
  const ZoneGeometry& g = spec.geometry;
  const RowBand& band = g.band(v.zone);
  if (band.empty()) throw Error(std::string("synth: ") + zone_name(v.zone) + " band is empty");
  const double band_h = band.row_end - band.row_start;
  const auto [xl, xr] = road_span(g, band.row_start + 0.5 * band_h);
  const double span = xr - xl;
  if (span <= 0.0) throw Error(std::string("synth: road does not cross the ") + zone_name(v.zone) + " band");
  const double slot = span / std::max(1, spec.zone_capacity);

  double w = 0.0;
  double h = 0.0;
  if (v.size == SizeClass::large) {
    w = 0.85 * slot;
    h = 0.75 * w;
  } else {
    w = 0.38 * slot;
    h = 0.9 * w;
  }
  h = std::min(h, 0.9 * band_h);
  w = std::max(w, 4.0);
  h = std::max(h, 4.0);

  const double cx = xl + v.offset_x * span;
  double y0 = band.row_start + v.offset_y * band_h - 0.5 * h;
  y0 = std::clamp(y0, static_cast<double>(band.row_start), band.row_end - h);

  PixelRect r;
  r.x0 = static_cast<int>(std::lround(cx - 0.5 * w));
  r.x1 = static_cast<int>(std::lround(cx + 0.5 * w));
  r.y0 = static_cast<int>(std::lround(y0));
  r.y1 = static_cast<int>(std::lround(y0 + h));
  if (r.x0 < 0 || r.y0 < 0 || r.x1 > spec.width() || r.y1 > spec.height() || r.x1 <= r.x0 || r.y1 <= r.y0) {
    throw Error("synth: vehicle falls outside the frame");
  }
  return r;
}

RgbImage render_scene(const SceneSpec& spec) {
  spec.geometry.validate();
  const ZoneGeometry& g = spec.geometry;
  const int width = spec.width();
  const int height = spec.height();

  std::vector<PixelRect> rects;
  rects.reserve(spec.vehicles.size());
  for (const Vehicle& v : spec.vehicles) rects.push_back(vehicle_rect(spec, v));

  RgbImage img(width, height);
  Rng noise(mix_seed(spec.rng_seed, 10));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const bool road = point_in_polygon(g.road_polygon, {x + 0.5, y + 0.5});
      const int n = static_cast<int>(noise.integer(-2, 2));
      img.set(x, y, shade(road ? kRoad : kOffRoad, n));
    }
  }

  if (spec.lane_marks) {
    constexpr std::array<double, 2> kDividers{1.0 / 3.0, 2.0 / 3.0};
    double top = height;
    for (const Point& p : g.road_polygon) top = std::min(top, p.y);
    for (int y = static_cast<int>(std::ceil(top)); y < height; ++y) {
      const auto [xl, xr] = road_span(g, y + 0.5);
      const double span = xr - xl;
      if (span <= 0.0) continue;
      // Dashes lengthen toward the bottom of the frame.
      const double depth = (y - top) / std::max(1.0, height - top);
      const double period = 18.0 + 50.0 * depth;
      if (std::fmod(y - top, period) >= 0.55 * period) continue;
      const double half = std::max(1.0, 0.008 * span);
      for (double frac : kDividers) {
        const double cx = xl + frac * span;
        const int x0 = static_cast<int>(std::lround(cx - half));
        const int x1 = static_cast<int>(std::lround(cx + half));
        for (int x = std::max(0, x0); x < std::min(width, x1); ++x) img.set(x, y, kLaneMark);
      }
    }
  }

  // Painter's order: farther (higher in frame) vehicles first.
  std::vector<std::size_t> order(spec.vehicles.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rects[a].y1 < rects[b].y1; });
  for (std::size_t i : order) {
    Rng texture(mix_seed(spec.vehicles[i].texture_seed, 11));
    if (spec.vehicles[i].size == SizeClass::large) {
      draw_large(img, rects[i], texture);
    } else {
      draw_small(img, rects[i], texture);
    }
  }
  return img;
}

SceneSpec empty_scene(const SceneSpec& spec) {
  SceneSpec empty = spec;
  empty.vehicles.clear();
  return empty;
}

double OracleLabelRules::weight(Zone zone, SizeClass size) const noexcept {
  const bool large = size == SizeClass::large;
  switch (zone) {
    case Zone::near: return large ? large_near : small_near;
    case Zone::mid: return large ? large_mid : small_mid;
    case Zone::far: return large ? large_far : small_far;
  }
  return 0.0;
}

void OracleLabelRules::validate() const {
  for (double w : {small_near, small_mid, small_far, large_near, large_mid, large_far}) {
    if (!(w > 0.0)) throw Error("oracle: vehicle weights must be > 0");
  }
  if (!(level3_score > 0.0 && level4_score >= level3_score)) throw Error("oracle: score thresholds must increase");
  if (min_per_zone_for_top < 1 || level1_max_vehicles < 0) throw Error("oracle: invalid vehicle counts");
  if (small_near_only_cap < 2 || small_near_only_cap > 4) throw Error("oracle: small_near_only_cap must be in 2..4");
}

int oracle_label(const SceneSpec& spec, const OracleLabelRules& rules) {
  std::array<int, 3> per_zone{};
  std::array<int, 3> large_per_zone{};
  double score = 0.0;
  for (const Vehicle& v : spec.vehicles) {
    const auto z = static_cast<std::size_t>(v.zone);
    ++per_zone[z];
    if (v.size == SizeClass::large) ++large_per_zone[z];
    score += rules.weight(v.zone, v.size);
  }
  const int near = static_cast<int>(Zone::near);
  const int mid = static_cast<int>(Zone::mid);
  const int far = static_cast<int>(Zone::far);
  const int total = per_zone[0] + per_zone[1] + per_zone[2];
  const int large = large_per_zone[0] + large_per_zone[1] + large_per_zone[2];

  const bool all_zones_busy = std::all_of(per_zone.begin(), per_zone.end(),
                                          [&](int n) { return n >= rules.min_per_zone_for_top; });
  if (all_zones_busy && large_per_zone[near] + large_per_zone[mid] >= 1) return 5;
  if (total <= rules.level1_max_vehicles && large == 0 && per_zone[near] == 0) return 1;

  int level = 4;
  if (score < rules.level3_score) {
    level = 2;
  } else if (score < rules.level4_score) {
    level = 3;
  }
  if (large == 0 && per_zone[mid] == 0 && per_zone[far] == 0) level = std::min(level, rules.small_near_only_cap);
  return level;
}

SceneSpec sample_scene(Rng& rng, const SynthConfig& cfg) {
  SceneSpec spec;
  spec.geometry = cfg.geometry();
  spec.lane_marks = cfg.lane_marks;
  spec.rng_seed = cfg.background_seed;
  spec.zone_capacity = cfg.zone_capacity;

  const int density = static_cast<int>(rng.integer(0, cfg.zone_capacity));
  for (Zone zone : kZones) {
    const int n = std::clamp(density + static_cast<int>(rng.integer(-1, 1)), 0, cfg.zone_capacity);
    std::vector<int> slots(static_cast<std::size_t>(cfg.zone_capacity));
    std::iota(slots.begin(), slots.end(), 0);
    rng.shuffle(std::span<int>(slots));
    for (int k = 0; k < n; ++k) {
      Vehicle v;
      v.zone = zone;
      v.size = rng.chance(cfg.large_probability) ? SizeClass::large : SizeClass::small;
      const double jitter = rng.uniform(-0.04, 0.04);
      v.offset_x = std::clamp((slots[static_cast<std::size_t>(k)] + 0.5 + jitter) / cfg.zone_capacity, 0.0, 1.0);
      v.offset_y = rng.uniform(0.3, 0.7);
      v.texture_seed = rng.next();
      spec.vehicles.push_back(v);
    }
  }
  return spec;
}

std::vector<GeneratedSample> generate_samples(int n, const OracleLabelRules& rules, std::uint64_t seed,
                                              const SynthConfig& cfg) {
  if (n < 1) throw Error("synth: sample count must be >= 1");
  rules.validate();
  const ZoneGeometry geom = cfg.geometry();

  SceneSpec base;
  base.geometry = geom;
  base.lane_marks = cfg.lane_marks;
  base.rng_seed = cfg.background_seed;
  base.zone_capacity = cfg.zone_capacity;
  const ZeroTrafficReference ref = make_reference(render_scene(base), cfg.canny, "synth-empty");
  const FeatureExtractor features(cfg.canny, geom, ref, cfg.filter);

  Rng rng(mix_seed(seed, 3));
  std::vector<GeneratedSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    GeneratedSample g;
    g.spec = sample_scene(rng, cfg);
    const RgbImage frame = render_scene(g.spec);
    g.sample.features = FeatureVector::from_counts(features.extract(frame));
    g.sample.label = oracle_label(g.spec, rules);
    char tag[32];
    std::snprintf(tag, sizeof tag, "synth-%04d", i);
    g.sample.tag = tag;
    out.push_back(std::move(g));
  }
  return out;
}

Dataset generate_dataset(int n, const OracleLabelRules& rules, std::uint64_t seed, const SynthConfig& cfg) {
  Dataset data;
  for (auto& g : generate_samples(n, rules, seed, cfg)) data.push_back(std::move(g.sample));
  return data;
}

}  // namespace edgeflow
