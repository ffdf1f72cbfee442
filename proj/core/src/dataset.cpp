#include "edgeflow/dataset.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "edgeflow/error.hpp"
#include "edgeflow/fileio.hpp"
#include "edgeflow/rng.hpp"

namespace edgeflow {

std::string encode_manifest(const Dataset& data) {
  std::string out;
  for (const LabeledSample& s : data) {
    nlohmann::json rec;
    if (s.features) rec["features"] = {s.features->near, s.features->mid, s.features->far};
    if (!s.image.empty()) rec["image"] = s.image;
    rec["label"] = s.label;
    if (!s.tag.empty()) rec["tag"] = s.tag;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

Dataset decode_manifest(const std::string& text) {
  Dataset data;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::string where = "manifest line " + std::to_string(line_no) + ": ";
    try {
      const auto rec = nlohmann::json::parse(line);
      if (!rec.is_object()) throw Error(where + "expected a JSON object");
      LabeledSample s;
      s.label = rec.at("label").get<int>();
      if (!valid_level(s.label)) throw Error(where + "label " + std::to_string(s.label) + " outside 1..5");
      if (rec.contains("features")) {
        const auto& f = rec["features"];
        if (!f.is_array() || f.size() != 3) throw Error(where + "features must be [near, mid, far]");
        for (const auto& v : f) {
          if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw Error(where + "feature counts must be non-negative integers");
          }
        }
        s.features = FeatureVector{f[0].get<std::uint64_t>(), f[1].get<std::uint64_t>(), f[2].get<std::uint64_t>()};
      }
      if (rec.contains("image")) s.image = rec["image"].get<std::string>();
      if (rec.contains("tag")) s.tag = rec["tag"].get<std::string>();
      if (!s.features && s.image.empty()) throw Error(where + "record needs \"features\" or \"image\"");
      data.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error(where + e.what());
    }
  }
  return data;
}

Dataset read_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_manifest(std::string(bytes.begin(), bytes.end()));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const Dataset& data) {
  write_file_atomic(path, encode_manifest(data));
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split: ratio must lie strictly between 0 and 1");
  if (data.size() < 2) throw Error("split: need at least 2 samples, got " + std::to_string(data.size()));
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(data.size())));
  if (n_train == 0 || n_train == data.size()) {
    throw Error("split: ratio " + std::to_string(ratio) + " leaves one side empty for " + std::to_string(data.size()) +
                " samples");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 2));
  rng.shuffle(std::span<std::size_t>(order));

  std::pair<Dataset, Dataset> parts;
  parts.first.reserve(n_train);
  parts.second.reserve(data.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? parts.first : parts.second).push_back(data[order[i]]);
  }
  return parts;
}

}  // namespace edgeflow
