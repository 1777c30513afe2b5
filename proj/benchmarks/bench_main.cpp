#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "mzweak/fringe_fit.hpp"
#include "mzweak/fringe_synth.hpp"
#include "mzweak/jones.hpp"
#include "mzweak/mzi.hpp"
#include "mzweak/weakmeas.hpp"

namespace {

using namespace mzweak;

void BM_PolarDecompose(benchmark::State& state) {
  jones::JonesMatrix a;
  a(0, 0) = {0.3, -0.2};
  a(0, 1) = {0.9, 0.1};
  a(1, 0) = {-0.4, 0.5};
  a(1, 1) = {0.2, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(jones::polar_decompose(a));
}
BENCHMARK(BM_PolarDecompose);

void BM_PhaseScan(benchmark::State& state) {
  const auto cfg = mzi::MziConfig::for_operator(jones::lowering(), jones::JonesVector::diagonal());
  for (auto _ : state) benchmark::DoNotOptimize(mzi::visibility_phase_scan(cfg, 360));
}
BENCHMARK(BM_PhaseScan);

fringe::FringeProfile noisy_profile() {
  fringe::DetectorConfig det;
  det.seed = 1;
  return fringe::generate_frames(fringe::FringeModelParams{1.0, 512.0, 120.0, 0.6, 0.25, 0.4}, det, 1).front();
}

void BM_FitFullModel(benchmark::State& state) {
  const auto prof = noisy_profile();
  for (auto _ : state) benchmark::DoNotOptimize(fringe::fit_full_model(prof));
}
BENCHMARK(BM_FitFullModel)->Unit(benchmark::kMicrosecond);

void BM_EnvelopeVisibility(benchmark::State& state) {
  const auto prof = noisy_profile();
  for (auto _ : state) benchmark::DoNotOptimize(fringe::envelope_visibility(prof));
}
BENCHMARK(BM_EnvelopeVisibility)->Unit(benchmark::kMicrosecond);

void BM_GenerateFrames(benchmark::State& state) {
  fringe::DetectorConfig det;
  const auto cfg = mzi::MziConfig::polarizer_hwp_setup(std::numbers::pi / 8);
  const fringe::FringeModelParams env{1.0, 512.0, 120.0, 0.0, 0.25, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fringe::generate_frames(cfg, env, det, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_GenerateFrames)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_AggregateFrames(benchmark::State& state) {
  fringe::DetectorConfig det;
  const auto cfg = mzi::MziConfig::polarizer_hwp_setup(std::numbers::pi / 8);
  const fringe::FringeModelParams env{1.0, 512.0, 120.0, 0.0, 0.25, 0.0};
  const auto frames = fringe::generate_frames(cfg, env, det, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fringe::aggregate_frames(0.0, frames, fringe::FitMethod::full_model));
  }
}
BENCHMARK(BM_AggregateFrames)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_CentroidExact(benchmark::State& state) {
  const auto phi = jones::hwp(0.3) * jones::JonesVector::diagonal();
  const auto c = weakmeas::WeakMeasConfig::from_ratio(jones::JonesVector::diagonal(), phi, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(weakmeas::centroid_exact(c));
}
BENCHMARK(BM_CentroidExact);

}  // namespace
BENCHMARK_MAIN();
