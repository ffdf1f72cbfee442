// Acceptance suite: one PASS/FAIL line per criterion, each with its runtime
// limit. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "edgeflow/canny.hpp"
#include "edgeflow/dataset.hpp"
#include "edgeflow/fileio.hpp"
#include "edgeflow/mlp.hpp"
#include "edgeflow/pnm.hpp"
#include "edgeflow/rng.hpp"
#include "edgeflow/static_filter.hpp"
#include "edgeflow/synth.hpp"
#include "grad_check.hpp"
#include "reference_canny.hpp"
#include "test_images.hpp"

using namespace edgeflow;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

int cli_run(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::istringstream in;
  std::ostringstream o, e;
  const int code = cli::run(args, in, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "  cli: %s", e.str().c_str());
  return code;
}

std::string slurp(const fs::path& p) {
  const auto bytes = read_file(p);
  return {bytes.begin(), bytes.end()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("edgeflow_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1 -------------------------------------------------------------------------
Verdict static_filter_truth_table() {
  const FilterParams strict{1, FilterMode::strict};
  int table_ok = 0;
  for (int real = 0; real <= 1; ++real) {
    for (int ref = 0; ref <= 1; ++ref) {
      const EdgeMap r(1, 1, real == 1);
      const ZeroTrafficReference z{EdgeMap(1, 1, ref == 1), "t", {}};
      const bool expected = real == 1 && ref == 0;
      table_ok += filter_static_edges(r, z, strict)(0, 0) == expected;
      table_ok += filter_static_edges(r, z, {0, FilterMode::tolerant})(0, 0) == expected;
    }
  }
  Rng rng(101);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const int w = static_cast<int>(rng.integer(1, 24));
    const int h = static_cast<int>(rng.integer(1, 24));
    const EdgeMap real = testimg::random_edges(w, h, rng.next(), rng.uniform());
    const ZeroTrafficReference ref{testimg::random_edges(w, h, rng.next(), rng.uniform()), "r", {}};
    const EdgeMap out = filter_static_edges(real, ref, strict, rng.chance(0.5));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) mismatches += out(x, y) != (real(x, y) && !ref.edges(x, y));
    }
  }
  return {table_ok == 8 && mismatches == 0,
          fmt("truth table %.0f/8 cases, %.0f pointwise mismatches over 1000 random pairs", table_ok, mismatches)};
}

// 2 -------------------------------------------------------------------------
Verdict canny_oracle() {
  const std::vector<GrayImage> images{
      testimg::constant(32, 32, 128),         testimg::square(40, 30, 5, 6, 12, 230, 20),
      testimg::square(64, 64, 20, 20, 24),    testimg::vertical_step(20, 20, 9, 0, 255),
      testimg::vertical_step(48, 32, 30, 200, 40), testimg::noise(24, 24, 5, 60, 190),
      testimg::noise(64, 48, 6),              testimg::blocks(48, 48, 3, 6),
      testimg::blocks(64, 64, 4, 10),         testimg::noise(16, 16, 7, 100, 140)};
  int matched = 0;
  for (const GrayImage& img : images) {
    const EdgeMap e = canny(img);
    const auto expected = reference::canny(testimg::to_reference(img), 1.4, 50, 100);
    matched += std::equal(expected.begin(), expected.end(), e.cells().begin());
  }
  return {matched == 10, fmt("%.0f/10 images match the brute-force reference pixel for pixel", matched)};
}

// 3 -------------------------------------------------------------------------
Verdict gradient_check() {
  MlpModel m = MlpModel::initialize(1);
  Rng bias_rng(100);
  for (auto& l : m.layers) {
    for (double& b : l.biases) b = bias_rng.uniform(-0.2, 0.2);
  }
  Rng rng(1);
  Dataset batch;
  for (int i = 0; i < 5; ++i) {
    batch.push_back({FeatureVector{static_cast<std::uint64_t>(rng.integer(0, 6000)),
                                   static_cast<std::uint64_t>(rng.integer(0, 6000)),
                                   static_cast<std::uint64_t>(rng.integer(0, 6000))},
                     "", static_cast<int>(rng.integer(1, 5)), ""});
  }
  const auto r = gradcheck::run(m, batch, 1e-3, false);
  const bool pass = r.kinked == 0 && r.checked == m.parameter_count() && r.worst_relative <= 1e-4;
  return {pass, fmt("%.0f parameters, worst relative error %.2e, %.0f near ReLU kinks", static_cast<double>(r.checked),
                    r.worst_relative, static_cast<double>(r.kinked))};
}

// 4 -------------------------------------------------------------------------
Verdict synthetic_accuracy() {
  const TrainConfig cfg;
  const Dataset data = generate_dataset(320, {}, 2024);
  const auto [train_set, test_set] = split_dataset(data, cfg.split_ratio, cfg.rng_seed);
  const TrainResult result = train(train_set, cfg);
  const AccuracyReport r = evaluate(result.model, test_set);
  return {r.exact_rate >= 0.64 && r.within_one_rate >= 0.90,
          fmt("held-out exact %.3f (floor 0.64), within one %.3f (floor 0.90), MAE %.3f", r.exact_rate,
              r.within_one_rate, r.mean_abs_error)};
}

// 5 -------------------------------------------------------------------------
Verdict latency_budget() {
  const fs::path dir = scratch("bench");
  if (cli_run({"gen", "-o", dir.string(), "-n", "6", "--seed", "55"}) != 0) return {false, "gen failed"};
  if (cli_run({"train", "-m", (dir / "manifest.jsonl").string(), "-o", (dir / "model.bin").string(), "--ratio", "0.5",
               "--epochs", "100"}) != 0) {
    return {false, "train failed"};
  }
  std::string table;
  if (cli_run({"bench", "-c", (dir / "config.json").string(), "-d", (dir / "frames").string()}, &table) != 0) {
    return {false, "bench failed"};
  }
  std::printf("%s", table.c_str());
  std::istringstream lines(table);
  std::string line;
  double mean_total = -1;
  int columns = 0;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string first;
    cells >> first;
    if (first == "Process") {
      std::string c;
      while (cells >> c) columns += c.rfind("Im", 0) == 0;
    }
    if (first == "Total") {
      double v = 0;
      while (cells >> v) mean_total = v;
    }
  }
  fs::remove_all(dir);
  return {columns == 6 && mean_total >= 0 && mean_total <= 3.4,
          fmt("%.0f frame columns, mean capture-to-estimate %.4f s (budget 3.4 s)", columns, mean_total)};
}

// 6 -------------------------------------------------------------------------
Verdict determinism() {
  std::vector<fs::path> dirs{scratch("det_a"), scratch("det_b")};
  std::vector<std::string> records;
  for (const auto& d : dirs) {
    const std::string dir = d.string();
    if (cli_run({"gen", "-o", dir, "-n", "40", "--width", "320", "--height", "240", "--seed", "808"}) != 0 ||
        cli_run({"train", "-m", dir + "/manifest.jsonl", "-o", dir + "/model.bin", "--epochs", "300"}) != 0) {
      return {false, "gen/train failed"};
    }
    for (const char* extra : {"", "--serial"}) {
      std::vector<std::string> args{"infer", "-c", dir + "/config.json", "-d", dir + "/frames"};
      if (*extra) args.push_back(extra);
      std::string out;
      if (cli_run(args, &out) != 0) return {false, "infer failed"};
      // Timings differ between runs; everything else must not.
      std::istringstream lines(out);
      std::string line, stripped;
      while (std::getline(lines, line)) {
        auto j = nlohmann::json::parse(line);
        j.erase("seconds");
        j["frame"] = fs::path(j["frame"].get<std::string>()).filename().string();
        stripped += j.dump() + "\n";
      }
      records.push_back(stripped);
    }
  }
  const bool manifests = slurp(dirs[0] / "manifest.jsonl") == slurp(dirs[1] / "manifest.jsonl");
  const bool models = slurp(dirs[0] / "model.bin") == slurp(dirs[1] / "model.bin");
  const bool estimates = records.size() == 4 && records[0] == records[1] && records[0] == records[2] &&
                         records[0] == records[3] && !records[0].empty();
  for (const auto& d : dirs) fs::remove_all(d);
  return {manifests && models && estimates,
          std::string("manifests ") + (manifests ? "identical" : "DIFFER") + ", models " +
              (models ? "identical" : "DIFFER") + ", estimates (parallel and serial) " +
              (estimates ? "identical" : "DIFFER")};
}

// 7 -------------------------------------------------------------------------
Verdict round_trips() {
  const fs::path dir = scratch("roundtrip");
  int failures = 0;
  const auto twice = [&](const std::string& name, const std::function<void(const fs::path&)>& save,
                         const std::function<void(const fs::path&, const fs::path&)>& reload) {
    const fs::path a = dir / (name + ".a");
    const fs::path b = dir / (name + ".b");
    save(a);
    reload(a, b);
    failures += slurp(a) != slurp(b);
  };
  Rng rng(77);
  for (int i = 0; i < 10; ++i) {
    const int w = static_cast<int>(rng.integer(1, 80));
    const int h = static_cast<int>(rng.integer(1, 80));
    const GrayImage gray = testimg::noise(w, h, rng.next());
    RgbImage rgb(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        rgb.set(x, y, {static_cast<std::uint8_t>(rng.integer(0, 255)), static_cast<std::uint8_t>(rng.integer(0, 255)),
                       static_cast<std::uint8_t>(rng.integer(0, 255))});
      }
    }
    const EdgeMap edges = testimg::random_edges(w, h, rng.next());
    twice("pgm", [&](const fs::path& p) { write_pgm(p, gray); },
          [](const fs::path& a, const fs::path& b) { write_pgm(b, read_pgm(a)); });
    twice("ppm", [&](const fs::path& p) { write_ppm(p, rgb); },
          [](const fs::path& a, const fs::path& b) { write_ppm(b, read_ppm(a)); });
    twice("edge", [&](const fs::path& p) { write_edge_pgm(p, edges); },
          [](const fs::path& a, const fs::path& b) { write_edge_pgm(b, read_edge_pgm(a)); });
    const MlpModel model = MlpModel::initialize(rng.next());
    twice("model", [&](const fs::path& p) { save_model(model, p); },
          [](const fs::path& a, const fs::path& b) { save_model(load_model(a), b); });
  }
  fs::remove_all(dir);
  return {failures == 0, fmt("%.0f byte mismatches over 40 save/load/save cycles (PGM, PPM, edge PGM, model)", failures)};
}

// 8 -------------------------------------------------------------------------
Verdict oracle_monotonicity() {
  Rng rng(8);
  const SynthConfig cfg;
  int violations = 0;
  for (int i = 0; i < 500; ++i) {
    SceneSpec s = sample_scene(rng, cfg);
    const int before = oracle_label(s);
    s.vehicles.push_back({kZones[static_cast<std::size_t>(rng.integer(0, 2))],
                          rng.chance(0.5) ? SizeClass::large : SizeClass::small, rng.uniform(), rng.uniform(), rng.next()});
    violations += oracle_label(s) < before;
  }
  return {violations == 0, fmt("%.0f label decreases over 500 one-vehicle-added pairs", violations)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {1, "static-filter truth table", 1.0, static_filter_truth_table},
      {2, "canny oracle equivalence", 10.0, canny_oracle},
      {3, "gradient check", 30.0, gradient_check},
      {4, "synthetic accuracy", 300.0, synthetic_accuracy},
      {5, "latency budget", 60.0, latency_budget},
      {6, "determinism", 120.0, determinism},
      {7, "round trips", 10.0, round_trips},
      {8, "oracle monotonicity", 10.0, oracle_monotonicity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = v.pass && secs < c.limit_s;
    failed += !pass;
    std::printf("[%s] %d %s: %s (%.2f s, limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs,
                c.limit_s);
    std::fflush(stdout);
  }
  std::printf("%d/8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
