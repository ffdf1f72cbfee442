#include "edgeflow/zones.hpp"

#include <algorithm>
#include <future>
#include <numeric>
#include <string>

#include "edgeflow/error.hpp"

namespace edgeflow {

const char* zone_name(Zone zone) noexcept {
  switch (zone) {
    case Zone::near: return "near";
    case Zone::mid: return "mid";
    case Zone::far: return "far";
  }
  return "?";
}

const RowBand& ZoneGeometry::band(Zone zone) const noexcept {
  switch (zone) {
    case Zone::near: return near_band;
    case Zone::mid: return mid_band;
    case Zone::far: return far_band;
  }
  return near_band;
}

namespace {

bool overlaps(const RowBand& a, const RowBand& b) {
  return !a.empty() && !b.empty() && a.row_start < b.row_end && b.row_start < a.row_end;
}

std::string describe(const RowBand& b) {
  return "[" + std::to_string(b.row_start) + ", " + std::to_string(b.row_end) + ")";
}

}  // namespace

void ZoneGeometry::validate() const {
  if (frame_width < 1 || frame_height < 1) throw Error("zones: frame dimensions must be positive");
  if (road_polygon.size() < 3) throw Error("zones: road polygon needs at least 3 vertices");
  for (const Point& p : road_polygon) {
    if (!(p.x >= 0.0 && p.x <= frame_width && p.y >= 0.0 && p.y <= frame_height)) {
      throw Error("zones: vertex (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") outside " +
                  std::to_string(frame_width) + "x" + std::to_string(frame_height) + " frame");
    }
  }
  for (Zone z : kZones) {
    const RowBand& b = band(z);
    if (b.row_start < 0 || b.row_end > frame_height || b.row_start > b.row_end) {
      throw Error(std::string("zones: ") + zone_name(z) + " band " + describe(b) + " is invalid for height " +
                  std::to_string(frame_height));
    }
  }
  if (overlaps(near_band, mid_band) || overlaps(mid_band, far_band) || overlaps(near_band, far_band)) {
    throw Error("zones: bands overlap");
  }
  if (far_band.row_end > mid_band.row_start || mid_band.row_end > near_band.row_start) {
    throw Error("zones: bands must be ordered far above mid above near");
  }
}

std::size_t ZoneCounts::operator[](Zone zone) const noexcept {
  switch (zone) {
    case Zone::near: return near;
    case Zone::mid: return mid;
    case Zone::far: return far;
  }
  return 0;
}

std::size_t& ZoneCounts::operator[](Zone zone) noexcept {
  switch (zone) {
    case Zone::mid: return mid;
    case Zone::far: return far;
    default: return near;
  }
}

bool point_in_polygon(const std::vector<Point>& polygon, Point p) noexcept {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = polygon[i];
    const Point& b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

EdgeMap zone_mask(const ZoneGeometry& geom, Zone zone, int width, int height) {
  geom.validate();
  if (geom.frame_width != width || geom.frame_height != height) {
    throw Error("zones: geometry frame " + std::to_string(geom.frame_width) + "x" + std::to_string(geom.frame_height) +
                " does not match " + std::to_string(width) + "x" + std::to_string(height));
  }
  EdgeMap mask(width, height);
  const RowBand& band = geom.band(zone);
  for (int y = band.row_start; y < band.row_end; ++y) {
    for (int x = 0; x < width; ++x) {
      if (point_in_polygon(geom.road_polygon, {x + 0.5, y + 0.5})) mask.set(x, y, true);
    }
  }
  return mask;
}

ZoneMasks::ZoneMasks(const ZoneGeometry& geom) : geom_(geom) {
  geom_.validate();
  for (Zone zone : kZones) {
    const RowBand& band = geom_.band(zone);
    auto& spans = spans_[static_cast<int>(zone)];
    for (int y = band.row_start; y < band.row_end; ++y) {
      int run_start = -1;
      for (int x = 0; x <= geom_.frame_width; ++x) {
        const bool inside = x < geom_.frame_width && point_in_polygon(geom_.road_polygon, {x + 0.5, y + 0.5});
        if (inside && run_start < 0) run_start = x;
        if (!inside && run_start >= 0) {
          spans.push_back({y, run_start, x});
          run_start = -1;
        }
      }
    }
  }
}

std::size_t ZoneMasks::area(Zone zone) const noexcept {
  const auto& spans = spans_[static_cast<int>(zone)];
  return std::accumulate(spans.begin(), spans.end(), std::size_t{0},
                         [](std::size_t acc, const Span& s) { return acc + static_cast<std::size_t>(s.x_end - s.x_begin); });
}

ZoneCounts ZoneMasks::count(const EdgeMap& edges, bool parallel) const {
  if (!edges.same_shape(geom_.frame_width, geom_.frame_height)) {
    throw Error("zones: edge map " + std::to_string(edges.width()) + "x" + std::to_string(edges.height()) +
                " does not match geometry frame " + std::to_string(geom_.frame_width) + "x" +
                std::to_string(geom_.frame_height));
  }
  const auto cells = edges.cells();
  const auto width = static_cast<std::size_t>(geom_.frame_width);
  auto count_zone = [&](Zone zone) {
    std::size_t n = 0;
    for (const Span& s : spans(zone)) {
      const auto row = cells.subspan(static_cast<std::size_t>(s.row) * width + static_cast<std::size_t>(s.x_begin),
                                     static_cast<std::size_t>(s.x_end - s.x_begin));
      for (std::uint8_t c : row) n += c;
    }
    return n;
  };

  ZoneCounts counts;
  if (parallel) {
    auto mid = std::async(std::launch::async, count_zone, Zone::mid);
    auto far = std::async(std::launch::async, count_zone, Zone::far);
    counts.near = count_zone(Zone::near);
    counts.mid = mid.get();
    counts.far = far.get();
  } else {
    counts.near = count_zone(Zone::near);
    counts.mid = count_zone(Zone::mid);
    counts.far = count_zone(Zone::far);
  }
  return counts;
}

ZoneCounts count_zone_pixels(const EdgeMap& edges, const ZoneGeometry& geom) { return ZoneMasks(geom).count(edges); }

}  // namespace edgeflow
