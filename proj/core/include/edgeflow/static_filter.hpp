#pragma once

#include <filesystem>
#include <string>

#include "edgeflow/canny.hpp"
#include "edgeflow/image.hpp"
#include "edgeflow/zones.hpp"

namespace edgeflow {

/// strict: keep real edges where the reference is background.
/// tolerant: additionally drop pixels within kernel_radius (Chebyshev) of
/// any reference edge pixel.
enum class FilterMode { strict, tolerant };

const char* filter_mode_name(FilterMode mode) noexcept;
FilterMode parse_filter_mode(const std::string& text);

struct FilterParams {
  int kernel_radius = 1;
  FilterMode mode = FilterMode::tolerant;

  void validate() const;
  /// Radius actually applied: 0 in strict mode.
  int effective_radius() const noexcept { return mode == FilterMode::strict ? 0 : kernel_radius; }

  bool operator==(const FilterParams&) const = default;
};

/// Edge map of an empty road, used to cancel static features (lane marks,
/// curbs, sensor noise) in runtime edge maps.
struct ZeroTrafficReference {
  EdgeMap edges;
  std::string capture_id;
  CannyParams canny;
};

/// Runs the Canny chain on an empty-road frame.
ZeroTrafficReference make_reference(const RgbImage& empty_frame, const CannyParams& params, std::string capture_id);

/// Writes `<base>.pgm` (edge map) and `<base>.json` (capture_id, size,
/// Canny settings).
void save_reference(const ZeroTrafficReference& ref, const std::filesystem::path& base);
ZeroTrafficReference load_reference(const std::filesystem::path& base);

/// Reference edges grown by `radius` in the Chebyshev metric. radius 0
/// returns a copy.
EdgeMap dilate(const EdgeMap& edges, int radius);

/// Removes static edges from `real`. Pixel survives iff real is an edge and
/// no reference edge lies within the effective radius. Throws on dimension
/// mismatch.
EdgeMap filter_static_edges(const EdgeMap& real, const ZeroTrafficReference& ref, const FilterParams& params,
                            bool parallel = false);

/// Fused filter + zone count; equals
/// count_zone_pixels(filter_static_edges(real, ref, params), geom).
ZoneCounts count_filtered_zone_pixels(const EdgeMap& real, const ZeroTrafficReference& ref, const ZoneGeometry& geom,
                                      const FilterParams& params);

/// Per-frame form of the fused operation with the suppression mask and zone
/// spans prepared once.
class StaticEdgeFilter {
 public:
  StaticEdgeFilter(const ZeroTrafficReference& ref, const FilterParams& params);

  const EdgeMap& suppression_mask() const noexcept { return suppress_; }
  const FilterParams& params() const noexcept { return params_; }

  EdgeMap apply(const EdgeMap& real, bool parallel = false) const;
  ZoneCounts count(const EdgeMap& real, const ZoneMasks& zones, bool parallel = false) const;

 private:
  FilterParams params_;
  EdgeMap suppress_;
};

}  // namespace edgeflow
