#include "edgeflow/static_filter.hpp"

#include <future>
#include <string>

#include <json.hpp>

#include "edgeflow/error.hpp"
#include "edgeflow/fileio.hpp"
#include "edgeflow/pnm.hpp"
#include "parallel.hpp"

namespace edgeflow {

const char* filter_mode_name(FilterMode mode) noexcept {
  return mode == FilterMode::strict ? "strict" : "tolerant";
}

FilterMode parse_filter_mode(const std::string& text) {
  if (text == "strict") return FilterMode::strict;
  if (text == "tolerant") return FilterMode::tolerant;
  throw Error("unknown filter mode '" + text + "' (expected strict or tolerant)");
}

void FilterParams::validate() const {
  if (kernel_radius < 0) throw Error("filter: kernel_radius must be >= 0, got " + std::to_string(kernel_radius));
}

ZeroTrafficReference make_reference(const RgbImage& empty_frame, const CannyParams& params, std::string capture_id) {
  return {canny(to_grayscale(empty_frame), params), std::move(capture_id), params};
}

namespace {

std::filesystem::path strip_known_extension(std::filesystem::path base) {
  const auto ext = base.extension();
  if (ext == ".pgm" || ext == ".json") base.replace_extension();
  return base;
}

std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix) {
  std::filesystem::path p = base;
  p += suffix;
  return p;
}

void require_same_shape(const EdgeMap& a, const EdgeMap& b) {
  if (!a.same_shape(b.width(), b.height())) {
    throw Error("filter: real edge map " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                " does not match reference " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

}  // namespace

void save_reference(const ZeroTrafficReference& ref, const std::filesystem::path& base_path) {
  const auto base = strip_known_extension(base_path);
  nlohmann::ordered_json meta;
  meta["capture_id"] = ref.capture_id;
  meta["width"] = ref.edges.width();
  meta["height"] = ref.edges.height();
  meta["canny"] = {{"sigma", ref.canny.gaussian_sigma},
                   {"low", ref.canny.low_threshold},
                   {"high", ref.canny.high_threshold}};
  write_edge_pgm(with_suffix(base, ".pgm"), ref.edges);
  write_file_atomic(with_suffix(base, ".json"), meta.dump(2) + "\n");
}

ZeroTrafficReference load_reference(const std::filesystem::path& base_path) {
  const auto base = strip_known_extension(base_path);
  ZeroTrafficReference ref;
  ref.edges = read_edge_pgm(with_suffix(base, ".pgm"));
  const auto meta_path = with_suffix(base, ".json");
  const auto bytes = read_file(meta_path);
  try {
    const auto meta = nlohmann::json::parse(bytes.begin(), bytes.end());
    ref.capture_id = meta.at("capture_id").get<std::string>();
    const int w = meta.at("width").get<int>();
    const int h = meta.at("height").get<int>();
    if (!ref.edges.same_shape(w, h)) throw Error("sidecar dimensions disagree with the edge map");
    const auto& c = meta.at("canny");
    ref.canny.gaussian_sigma = c.at("sigma").get<double>();
    ref.canny.low_threshold = c.at("low").get<double>();
    ref.canny.high_threshold = c.at("high").get<double>();
    ref.canny.validate();
  } catch (const nlohmann::json::exception& e) {
    throw Error(meta_path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(meta_path.string() + ": " + e.what());
  }
  return ref;
}

EdgeMap dilate(const EdgeMap& edges, int radius) {
  if (radius < 0) throw Error("dilate: radius must be >= 0");
  if (radius == 0 || edges.empty()) return edges;
  const int w = edges.width();
  const int h = edges.height();
  EdgeMap horizontal(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!edges(x, y)) continue;
      for (int k = std::max(0, x - radius); k <= std::min(w - 1, x + radius); ++k) horizontal.set(k, y, true);
    }
  }
  EdgeMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!horizontal(x, y)) continue;
      for (int k = std::max(0, y - radius); k <= std::min(h - 1, y + radius); ++k) out.set(x, k, true);
    }
  }
  return out;
}

StaticEdgeFilter::StaticEdgeFilter(const ZeroTrafficReference& ref, const FilterParams& params) : params_(params) {
  params_.validate();
  suppress_ = dilate(ref.edges, params_.effective_radius());
}

EdgeMap StaticEdgeFilter::apply(const EdgeMap& real, bool parallel) const {
  require_same_shape(real, suppress_);
  EdgeMap out(real.width(), real.height());
  const auto src = real.cells();
  const auto mask = suppress_.cells();
  auto dst = out.cells();
  const auto width = static_cast<std::size_t>(real.width());
  detail::parallel_chunks(real.height(), parallel, [&](int row_begin, int row_end) {
    for (std::size_t i = row_begin * width; i < row_end * width; ++i) {
      dst[i] = static_cast<std::uint8_t>(src[i] & (mask[i] ^ 1u));
    }
  });
  return out;
}

ZoneCounts StaticEdgeFilter::count(const EdgeMap& real, const ZoneMasks& zones, bool parallel) const {
  require_same_shape(real, suppress_);
  const ZoneGeometry& geom = zones.geometry();
  if (!real.same_shape(geom.frame_width, geom.frame_height)) {
    throw Error("filter: edge map " + std::to_string(real.width()) + "x" + std::to_string(real.height()) +
                " does not match zone geometry frame " + std::to_string(geom.frame_width) + "x" +
                std::to_string(geom.frame_height));
  }
  const auto src = real.cells();
  const auto mask = suppress_.cells();
  const auto width = static_cast<std::size_t>(real.width());
  auto count_zone = [&](Zone zone) {
    std::size_t n = 0;
    for (const ZoneMasks::Span& s : zones.spans(zone)) {
      const std::size_t begin = static_cast<std::size_t>(s.row) * width + static_cast<std::size_t>(s.x_begin);
      const std::size_t end = begin + static_cast<std::size_t>(s.x_end - s.x_begin);
      for (std::size_t i = begin; i < end; ++i) n += src[i] & (mask[i] ^ 1u);
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

EdgeMap filter_static_edges(const EdgeMap& real, const ZeroTrafficReference& ref, const FilterParams& params,
                            bool parallel) {
  require_same_shape(real, ref.edges);
  return StaticEdgeFilter(ref, params).apply(real, parallel);
}

ZoneCounts count_filtered_zone_pixels(const EdgeMap& real, const ZeroTrafficReference& ref, const ZoneGeometry& geom,
                                      const FilterParams& params) {
  require_same_shape(real, ref.edges);
  return StaticEdgeFilter(ref, params).count(real, ZoneMasks(geom));
}

}  // namespace edgeflow
