// Serial reference vs OpenMP kernels, plus the per-iteration pipeline stages.

#include <benchmark/benchmark.h>

#include "declutter/clutter.hpp"
#include "declutter/grasp.hpp"
#include "declutter/kernels.hpp"
#include "declutter/push.hpp"
#include "declutter/simscene.hpp"

using namespace declutter;
using kernels::Exec;

namespace {

struct Fixture {
  sim::Scene scene = sim::spawn_heap(7, 20, sim::default_catalog());
  sim::CameraModel cam = sim::CameraModel::covering(scene.workspace);
  sim::RenderedView view = sim::render(scene, cam);
  BinaryMask mask = grasp::depth_filter(view.depth, sim::background(scene, cam));
  GrayImage luminance = [this] {
    GrayImage l(view.rgb.width(), view.rgb.height());
    for (std::size_t i = 0; i < l.size(); ++i) l.pixels()[i] = clutter::rgb_to_lab(view.rgb.pixels()[i]).l;
    return l;
  }();
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void BM_GaussianBlur(benchmark::State& state) {
  const auto k = kernels::gaussian_kernel(5.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::convolve_separable(fixture().luminance, k, k, exec_of(state)));
}
BENCHMARK(BM_GaussianBlur)->Arg(0)->Arg(1);

void BM_SquaredDistance(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(push::squared_distance_with_border(fixture().mask, exec_of(state)));
}
BENCHMARK(BM_SquaredDistance)->Arg(0)->Arg(1);

void BM_KMeans(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(grasp::kmeans(fixture().mask, 20, 1, exec_of(state)));
}
BENCHMARK(BM_KMeans)->Arg(0)->Arg(1);

void BM_ClutterMap(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(clutter::compute_clutter_map(fixture().view.rgb, {}, exec_of(state)));
}
BENCHMARK(BM_ClutterMap)->Arg(0)->Arg(1);

void BM_Render(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(sim::render(fixture().scene, fixture().cam));
}
BENCHMARK(BM_Render);

void BM_PlanGrasps(benchmark::State& state) {
  grasp::PlanInputs in;
  in.k = 20;
  for (auto _ : state) benchmark::DoNotOptimize(grasp::plan_grasps_with_k(fixture().view.depth, fixture().mask, in));
}
BENCHMARK(BM_PlanGrasps);

}  // namespace

BENCHMARK_MAIN();
