#include "colorgs/dataset.hpp"
#include "colorgs/gradients.hpp"
#include "colorgs/rasterizer.hpp"
#include "colorgs/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace colorgs;

namespace {

// Depth-seeded scene of a default synthetic frame (256 primitives at 64x64).
struct Setup {
  SyntheticScene syn;
  GaussianScene scene;
  DeformationField field;

  explicit Setup(int size) {
    SyntheticSpec spec;
    spec.width = spec.height = size;
    spec.frames = 2;
    syn = generate_synthetic(spec);
    const FrameSample& f0 = syn.dataset.frames[0];
    scene = init_from_depth(f0, syn.dataset.camera_of(f0), {});
    field = make_deformation_field({}, scene.size());
  }
};

void BM_Render(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  RenderConfig cfg;
  cfg.workers = static_cast<int>(state.range(1));
  const CameraModel& cam = s.syn.dataset.cameras[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(render(s.scene, cam, cfg));
  }
  state.counters["primitives"] = static_cast<double>(s.scene.size());
}
BENCHMARK(BM_Render)->Args({64, 1})->Args({128, 1})->Args({128, 2})->Unit(benchmark::kMillisecond);

void BM_Backward(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  RenderConfig cfg;
  cfg.workers = static_cast<int>(state.range(1));
  const FrameSample& f = s.syn.dataset.frames[1];
  const CameraModel& cam = s.syn.dataset.cameras[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward(f, cam, s.scene, s.field, f.time, cfg));
  }
  state.counters["primitives"] = static_cast<double>(s.scene.size());
}
BENCHMARK(BM_Backward)->Args({64, 1})->Args({128, 1})->Args({128, 2})->Unit(benchmark::kMillisecond);

void BM_DeformScene(benchmark::State& state) {
  const Setup s(64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(deform_scene(s.scene, s.field, 0.37));
  }
}
BENCHMARK(BM_DeformScene)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
