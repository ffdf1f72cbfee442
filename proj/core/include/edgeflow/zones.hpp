#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "edgeflow/image.hpp"

namespace edgeflow {

enum class Zone { near = 0, mid = 1, far = 2 };

inline constexpr std::array<Zone, 3> kZones{Zone::near, Zone::mid, Zone::far};

const char* zone_name(Zone zone) noexcept;

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

/// Half-open row interval [row_start, row_end).
struct RowBand {
  int row_start = 0;
  int row_end = 0;

  bool empty() const noexcept { return row_end <= row_start; }
  bool contains(int row) const noexcept { return row >= row_start && row < row_end; }
  bool operator==(const RowBand&) const = default;
};

/// Road region of the camera view split into depth bands. Coordinates are
/// continuous image coordinates; pixel (x, y) has its center at
/// (x + 0.5, y + 0.5). The near band sits lowest in the image.
struct ZoneGeometry {
  int frame_width = 0;
  int frame_height = 0;
  std::vector<Point> road_polygon;
  RowBand near_band;
  RowBand mid_band;
  RowBand far_band;

  const RowBand& band(Zone zone) const noexcept;

  /// Throws edgeflow::Error for fewer than three vertices, vertices outside
  /// [0, width] x [0, height], bands outside the frame, inverted bands, or
  /// bands that overlap or violate far < mid < near row ordering.
  void validate() const;

  bool operator==(const ZoneGeometry&) const = default;
};

struct ZoneCounts {
  std::size_t near = 0;
  std::size_t mid = 0;
  std::size_t far = 0;

  std::size_t operator[](Zone zone) const noexcept;
  std::size_t& operator[](Zone zone) noexcept;
  std::size_t total() const noexcept { return near + mid + far; }

  bool operator==(const ZoneCounts&) const = default;
};

/// Even-odd point-in-polygon test.
bool point_in_polygon(const std::vector<Point>& polygon, Point p) noexcept;

/// Pixels whose center lies inside the road polygon and within the zone's
/// row band. Throws if the geometry is invalid or does not match
/// width x height.
EdgeMap zone_mask(const ZoneGeometry& geom, Zone zone, int width, int height);

/// Counts edge pixels per zone. Throws on dimension mismatch.
ZoneCounts count_zone_pixels(const EdgeMap& edges, const ZoneGeometry& geom);

/// Precomputed masks for one geometry, for repeated counting on the
/// per-frame path. Each zone is stored as row spans so counting touches
/// only in-zone pixels.
class ZoneMasks {
 public:
  struct Span {
    int row = 0;
    int x_begin = 0;
    int x_end = 0;
  };

  explicit ZoneMasks(const ZoneGeometry& geom);

  const ZoneGeometry& geometry() const noexcept { return geom_; }
  const std::vector<Span>& spans(Zone zone) const noexcept { return spans_[static_cast<int>(zone)]; }
  std::size_t area(Zone zone) const noexcept;

  /// Same result as count_zone_pixels; `parallel` counts the three zones
  /// on separate threads.
  ZoneCounts count(const EdgeMap& edges, bool parallel = false) const;

 private:
  ZoneGeometry geom_;
  std::array<std::vector<Span>, 3> spans_;
};

}  // namespace edgeflow
