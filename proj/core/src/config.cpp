#include "edgeflow/config.hpp"

#include <algorithm>

#include <json.hpp>

#include "edgeflow/error.hpp"
#include "edgeflow/fileio.hpp"

namespace edgeflow {

namespace {

using nlohmann::json;

RowBand band_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error("config: band must be [row_start, row_end]");
  return {j[0].get<int>(), j[1].get<int>()};
}

void require_known_keys(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw Error("config: " + where + " must be an object");
  for (const auto& item : obj.items()) {
    const auto match = [&](const char* k) { return item.key() == k; };
    if (std::none_of(known.begin(), known.end(), match)) {
      throw Error("config: unknown key '" + where + item.key() + "'");
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  return path;
}

}  // namespace

PipelineConfig decode_config(const std::string& text, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  try {
    const json root = json::parse(text);
    if (!root.is_object()) throw Error("config: expected a JSON object");
    require_known_keys(root, {"canny", "geometry", "filter", "reference", "model", "parallel"}, "");
    if (root.contains("canny")) {
      const json& c = root["canny"];
      require_known_keys(c, {"sigma", "low", "high"}, "canny.");
      cfg.canny.gaussian_sigma = c.value("sigma", cfg.canny.gaussian_sigma);
      cfg.canny.low_threshold = c.value("low", cfg.canny.low_threshold);
      cfg.canny.high_threshold = c.value("high", cfg.canny.high_threshold);
    }
    const json& g = root.at("geometry");
    require_known_keys(g, {"width", "height", "road_polygon", "near", "mid", "far"}, "geometry.");
    cfg.geometry.frame_width = g.at("width").get<int>();
    cfg.geometry.frame_height = g.at("height").get<int>();
    for (const json& v : g.at("road_polygon")) {
      if (!v.is_array() || v.size() != 2) throw Error("config: polygon vertices must be [x, y]");
      cfg.geometry.road_polygon.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    cfg.geometry.near_band = band_from(g.at("near"));
    cfg.geometry.mid_band = band_from(g.at("mid"));
    cfg.geometry.far_band = band_from(g.at("far"));
    if (root.contains("filter")) {
      const json& f = root["filter"];
      require_known_keys(f, {"kernel_radius", "mode"}, "filter.");
      cfg.filter.kernel_radius = f.value("kernel_radius", cfg.filter.kernel_radius);
      if (f.contains("mode")) cfg.filter.mode = parse_filter_mode(f["mode"].get<std::string>());
    }
    if (root.contains("reference")) cfg.reference_path = resolve(base_dir, root["reference"].get<std::string>());
    if (root.contains("model")) cfg.model_path = resolve(base_dir, root["model"].get<std::string>());
    cfg.parallel = root.value("parallel", cfg.parallel);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  cfg.canny.validate();
  cfg.geometry.validate();
  cfg.filter.validate();
  return cfg;
}

std::string encode_config(const PipelineConfig& cfg) {
  nlohmann::ordered_json root;
  root["canny"] = {{"sigma", cfg.canny.gaussian_sigma},
                   {"low", cfg.canny.low_threshold},
                   {"high", cfg.canny.high_threshold}};
  nlohmann::ordered_json g;
  g["width"] = cfg.geometry.frame_width;
  g["height"] = cfg.geometry.frame_height;
  g["road_polygon"] = nlohmann::ordered_json::array();
  for (const Point& p : cfg.geometry.road_polygon) g["road_polygon"].push_back({p.x, p.y});
  g["near"] = {cfg.geometry.near_band.row_start, cfg.geometry.near_band.row_end};
  g["mid"] = {cfg.geometry.mid_band.row_start, cfg.geometry.mid_band.row_end};
  g["far"] = {cfg.geometry.far_band.row_start, cfg.geometry.far_band.row_end};
  root["geometry"] = g;
  root["filter"] = {{"kernel_radius", cfg.filter.kernel_radius}, {"mode", filter_mode_name(cfg.filter.mode)}};
  if (!cfg.reference_path.empty()) root["reference"] = cfg.reference_path.generic_string();
  if (!cfg.model_path.empty()) root["model"] = cfg.model_path.generic_string();
  root["parallel"] = cfg.parallel;
  return root.dump(2) + "\n";
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_config(std::string(bytes.begin(), bytes.end()), path.parent_path());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void save_config(const std::filesystem::path& path, const PipelineConfig& cfg) {
  write_file_atomic(path, encode_config(cfg));
}

}  // namespace edgeflow
