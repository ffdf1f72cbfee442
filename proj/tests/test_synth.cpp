#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "edgeflow/error.hpp"
#include "edgeflow/pipeline.hpp"
#include "edgeflow/pnm.hpp"
#include "edgeflow/synth.hpp"

using namespace edgeflow;

namespace {

SceneSpec base_scene(int w = 320, int h = 240) {
  SceneSpec s;
  s.geometry = default_geometry(w, h);
  return s;
}

Vehicle vehicle(Zone z, SizeClass c, double x = 0.5, std::uint64_t seed = 1) { return {z, c, x, 0.5, seed}; }

SceneSpec with(std::initializer_list<Vehicle> vs) {
  SceneSpec s = base_scene();
  s.vehicles = vs;
  return s;
}

}  // namespace

TEST_CASE("default geometry is valid and ordered") {
  for (auto [w, h] : {std::pair{640, 480}, std::pair{320, 240}, std::pair{64, 48}}) {
    const ZoneGeometry g = default_geometry(w, h);
    CHECK_NOTHROW(g.validate());
    CHECK(g.far_band.row_end <= g.mid_band.row_start);
    CHECK(g.mid_band.row_end <= g.near_band.row_start);
  }
}

TEST_CASE("rendering is deterministic") {
  SceneSpec s = with({vehicle(Zone::near, SizeClass::large, 0.3, 5), vehicle(Zone::far, SizeClass::small, 0.7, 6)});
  const RgbImage a = render_scene(s);
  const RgbImage b = render_scene(s);
  CHECK(encode_ppm(a) == encode_ppm(b));
  s.vehicles[0].texture_seed = 99;
  CHECK_FALSE(render_scene(s) == a);
}

TEST_CASE("an empty scene produces only static road edges") {
  SceneSpec s = base_scene();
  s.lane_marks = false;
  const EdgeMap e = canny(to_grayscale(render_scene(s)));
  CHECK(e.count() > 0);
  // All edges hug the road boundary: each lies within 2 px of a pixel whose
  // center is on the other side of the polygon.
  const auto& poly = s.geometry.road_polygon;
  for (int y = 0; y < e.height(); ++y) {
    for (int x = 0; x < e.width(); ++x) {
      if (!e(x, y)) continue;
      const bool inside = point_in_polygon(poly, {x + 0.5, y + 0.5});
      bool boundary = false;
      for (int dy = -2; dy <= 2 && !boundary; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          if (point_in_polygon(poly, {x + dx + 0.5, y + dy + 0.5}) != inside) {
            boundary = true;
            break;
          }
        }
      }
      REQUIRE(boundary);
    }
  }

  // Against its own reference the empty scene has no vehicular edges.
  const SceneSpec marked = base_scene();
  const ZeroTrafficReference ref = make_reference(render_scene(marked), {}, "empty");
  const FeatureExtractor fx({}, marked.geometry, ref, {});
  CHECK(fx.extract(render_scene(marked)) == ZoneCounts{});
}

TEST_CASE("a large vehicle yields more near-zone edges than a small one") {
  const SceneSpec empty = base_scene();
  const ZeroTrafficReference ref = make_reference(render_scene(empty), {}, "empty");
  const FeatureExtractor fx({}, empty.geometry, ref, {});
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    for (double x : {0.25, 0.5, 0.75}) {
      const auto large = fx.extract(render_scene(with({vehicle(Zone::near, SizeClass::large, x, seed)})));
      const auto small = fx.extract(render_scene(with({vehicle(Zone::near, SizeClass::small, x, seed)})));
      CHECK(large.near > small.near);
      CHECK(small.near > 0);
    }
  }
}

TEST_CASE("vehicles must stay inside the frame") {
  ZoneGeometry g = default_geometry(320, 240);
  g.road_polygon = {{0, 240}, {320, 240}, {320, 50}, {0, 50}};
  SceneSpec s;
  s.geometry = g;
  s.zone_capacity = 1;
  s.vehicles = {vehicle(Zone::near, SizeClass::large, 1.0)};
  CHECK_THROWS_AS(render_scene(s), Error);
  s.vehicles = {vehicle(Zone::near, SizeClass::large, 0.5)};
  CHECK_NOTHROW(render_scene(s));
  s.vehicles = {{Zone::near, SizeClass::small, 1.5, 0.5, 1}};
  CHECK_THROWS_AS(render_scene(s), Error);
}

TEST_CASE("oracle labels follow the expert rules") {
  CHECK(oracle_label(base_scene()) == 1);

  // Two vehicles in every zone with large ones in near and mid: top level.
  CHECK(oracle_label(with({vehicle(Zone::near, SizeClass::large), vehicle(Zone::near, SizeClass::small),
                           vehicle(Zone::mid, SizeClass::large), vehicle(Zone::mid, SizeClass::small),
                           vehicle(Zone::far, SizeClass::small), vehicle(Zone::far, SizeClass::small)})) == 5);

  // A crowd of small vehicles in the near zone alone stays below level 4.
  CHECK(oracle_label(with({vehicle(Zone::near, SizeClass::small, 0.1), vehicle(Zone::near, SizeClass::small, 0.3),
                           vehicle(Zone::near, SizeClass::small, 0.6), vehicle(Zone::near, SizeClass::small, 0.9)})) <= 3);

  // A few small vehicles in mid and far only: level 1.
  CHECK(oracle_label(with({vehicle(Zone::mid, SizeClass::small), vehicle(Zone::far, SizeClass::small)})) == 1);

  // Large near/mid vehicles drive the level up.
  CHECK(oracle_label(with({vehicle(Zone::near, SizeClass::large)})) == 3);
  CHECK(oracle_label(with({vehicle(Zone::near, SizeClass::large), vehicle(Zone::mid, SizeClass::large)})) == 4);
}

TEST_CASE("oracle labels never drop when a vehicle is added") {
  Rng rng(2024);
  SynthConfig cfg;
  cfg.width = 320;
  cfg.height = 240;
  for (int i = 0; i < 500; ++i) {
    SceneSpec s = sample_scene(rng, cfg);
    const int before = oracle_label(s);
    s.vehicles.push_back({kZones[static_cast<std::size_t>(rng.integer(0, 2))],
                          rng.chance(0.5) ? SizeClass::large : SizeClass::small, rng.uniform(), rng.uniform(), rng.next()});
    REQUIRE(oracle_label(s) >= before);
  }
}

TEST_CASE("generated datasets") {
  SynthConfig cfg;
  cfg.width = 320;
  cfg.height = 240;
  const Dataset one = generate_dataset(1, {}, 5, cfg);
  CHECK(one.size() == 1);
  CHECK(one[0].tag == "synth-0000");

  const Dataset a = generate_dataset(50, {}, 11, cfg);
  const Dataset b = generate_dataset(50, {}, 11, cfg);
  CHECK(encode_manifest(a) == encode_manifest(b));
  std::set<int> labels;
  for (const auto& s : a) labels.insert(s.label);
  CHECK(labels == std::set<int>{1, 2, 3, 4, 5});
  CHECK_THROWS_AS(generate_dataset(0, {}, 1, cfg), Error);
}

TEST_CASE("near-zone edge counts track the label") {
  SynthConfig cfg;
  cfg.width = 320;
  cfg.height = 240;
  const Dataset d = generate_dataset(200, {}, 77, cfg);
  double sum1 = 0, sum5 = 0;
  int n1 = 0, n5 = 0;
  for (const auto& s : d) {
    if (s.label == 1) sum1 += static_cast<double>(s.features->near), ++n1;
    if (s.label == 5) sum5 += static_cast<double>(s.features->near), ++n5;
  }
  REQUIRE(n1 > 0);
  REQUIRE(n5 > 0);
  CHECK(sum5 / n5 > sum1 / n1);
}
