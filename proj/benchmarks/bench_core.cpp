#include <benchmark/benchmark.h>

#include <numbers>

#include "hapticdrone/closed_loop.hpp"
#include "hapticdrone/linkage.hpp"
#include "hapticdrone/patterns.hpp"
#include "hapticdrone/png_codec.hpp"
#include "hapticdrone/protocol.hpp"
#include "hapticdrone/render.hpp"

namespace hd = hapticdrone;

namespace {

hd::sim::SceneConfig bench_scene() {
  hd::sim::SceneConfig s;
  s.drone_start = {-1.0, 0.5, 1.0};
  s.objects = {{hd::Shape::Sphere, hd::Texture::Food, {1, -1, 1}, 0.2},
               {hd::Shape::Cube, hd::Texture::Plastic, {-2, 1, 1}, 0.25},
               {hd::Shape::Cone, hd::Texture::Other, {2, 1, 1}, 0.3}};
  s.background = hd::sim::BackgroundStyle::Cluttered;
  return s;
}

void BM_ForwardKinematics(benchmark::State& state) {
  const hd::linkage::LinkageGeometry g;
  double t = 1.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hd::linkage::forward_kinematics(g, {t, std::numbers::pi - t}));
    t = t > 1.8 ? 1.2 : t + 1e-4;
  }
}
BENCHMARK(BM_ForwardKinematics);

void BM_InverseKinematics(benchmark::State& state) {
  const hd::linkage::LinkageGeometry g;
  double y = 0.09;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hd::linkage::inverse_kinematics(g, {0.02, y}));
    y = y > 0.115 ? 0.09 : y + 1e-5;
  }
}
BENCHMARK(BM_InverseKinematics);

void BM_Render(benchmark::State& state) {
  const auto w = hd::sim::spawn(bench_scene(), {});
  const auto view = static_cast<hd::sim::FrameView>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hd::sim::render_topdown(w, view));
}
BENCHMARK(BM_Render)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PngEncode(benchmark::State& state) {
  const auto frame = hd::sim::render_topdown(hd::sim::spawn(bench_scene(), {}),
                                             hd::sim::FrameView::VR);
  for (auto _ : state) benchmark::DoNotOptimize(hd::png::encode(frame));
}
BENCHMARK(BM_PngEncode)->Unit(benchmark::kMillisecond);

void BM_ActRequestEncode(benchmark::State& state) {
  const auto w = hd::sim::spawn(bench_scene(), {});
  const hd::Observation obs{hd::sim::render_topdown(w, hd::sim::FrameView::Real),
                            hd::sim::render_topdown(w, hd::sim::FrameView::VR),
                            "fly to the sphere", 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hd::protocol::encode_request(hd::protocol::make_request(obs)));
  }
}
BENCHMARK(BM_ActRequestEncode)->Unit(benchmark::kMillisecond);

void BM_VisionOracleAct(benchmark::State& state) {
  const auto w = hd::sim::spawn(bench_scene(), {});
  const hd::Observation obs{hd::sim::render_topdown(w, hd::sim::FrameView::Real),
                            hd::sim::render_topdown(w, hd::sim::FrameView::VR),
                            "fly to the sphere", 0};
  hd::policy::VisionOraclePolicy p;
  for (auto _ : state) benchmark::DoNotOptimize(p.act(obs, nullptr));
}
BENCHMARK(BM_VisionOracleAct)->Unit(benchmark::kMillisecond);

void BM_ControlTick(benchmark::State& state) {
  hd::policy::OraclePolicy oracle;
  hd::service::LoopOptions opts;
  opts.stop_on_success = false;
  hd::service::ClosedLoop loop(bench_scene(), "fly to the sphere", oracle, opts);
  for (auto _ : state) {
    if (loop.finished()) {
      state.PauseTiming();
      loop.reset(bench_scene());
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(loop.tick());
  }
}
BENCHMARK(BM_ControlTick)->Unit(benchmark::kMillisecond);

void BM_PatternDecode(benchmark::State& state) {
  const auto sig = hd::eval::render_pattern_signal({hd::Shape::Cone, hd::VibrationLevel::High},
                                                   hd::Texture::Plastic);
  for (auto _ : state) benchmark::DoNotOptimize(hd::eval::decode_pattern(sig));
}
BENCHMARK(BM_PatternDecode);

}  // namespace

BENCHMARK_MAIN();
