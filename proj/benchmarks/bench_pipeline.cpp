#include <benchmark/benchmark.h>

#include "edgeflow/canny.hpp"
#include "edgeflow/mlp.hpp"
#include "edgeflow/pipeline.hpp"
#include "edgeflow/static_filter.hpp"
#include "edgeflow/synth.hpp"

using namespace edgeflow;

namespace {

struct Scene {
  SynthConfig synth;
  RgbImage frame;
  ZeroTrafficReference ref;
  MlpModel model = MlpModel::initialize(3);

  Scene() {
    Rng rng(17);
    SceneSpec spec = sample_scene(rng, synth);
    frame = render_scene(spec);
    ref = make_reference(render_scene(empty_scene(spec)), synth.canny, "empty");
  }
};

const Scene& scene() {
  static const Scene s;
  return s;
}

void BM_Grayscale(benchmark::State& state) {
  const RgbImage& frame = scene().frame;
  for (auto _ : state) benchmark::DoNotOptimize(to_grayscale(frame));
}

void BM_Canny(benchmark::State& state) {
  const GrayImage gray = to_grayscale(scene().frame);
  for (auto _ : state) benchmark::DoNotOptimize(canny(gray));
}

void BM_FilterAndCount(benchmark::State& state) {
  const Scene& s = scene();
  const EdgeMap edges = canny(to_grayscale(s.frame));
  const ZoneMasks zones(s.synth.geometry());
  const StaticEdgeFilter filter(s.ref, {});
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(filter.count(edges, zones, parallel));
}

void BM_Forward(benchmark::State& state) {
  const MlpModel& m = scene().model;
  const FeatureVector fv{1200, 800, 300};
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, fv));
}

void BM_Frame(benchmark::State& state) {
  const Scene& s = scene();
  PipelineConfig cfg;
  cfg.geometry = s.synth.geometry();
  cfg.parallel = state.range(0) != 0;
  const Pipeline p(cfg, s.ref, s.model);
  for (auto _ : state) benchmark::DoNotOptimize(p.run_frame(s.frame));
}

}  // namespace

BENCHMARK(BM_Grayscale)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Canny)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FilterAndCount)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Forward);
BENCHMARK(BM_Frame)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
