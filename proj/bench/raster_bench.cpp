#include <benchmark/benchmark.h>

#include <numbers>

#include "carpet/raster.hpp"

using namespace carpet;

namespace {

RationalMap example_map() {
  return RationalMap(Polynomial({-1, 0, 0, 0, 16}), Polynomial({0, 0, 16}));
}

RasterOptions window(int resolution) {
  RasterOptions o;
  o.window.half_width = 1.2;
  o.resolution = resolution;
  return o;
}

void BM_rasterize(benchmark::State& state) {
  const RationalMap f = example_map();
  const auto cycles = postcritical_report(f).attracting_cycles();
  const RasterOptions o = window(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(f, cycles, o));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_rasterize_serial(benchmark::State& state) {
  const RationalMap f = example_map();
  const auto cycles = postcritical_report(f).attracting_cycles();
  const RasterOptions o = window(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_serial(f, cycles, o));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

std::vector<cplx> polygon(long n) {
  std::vector<cplx> v;
  for (long k = 0; k < n; ++k) v.push_back(std::polar(1.0 + 0.1 * (k % 7), 2.0 * std::numbers::pi * k / n));
  return v;
}

void BM_diameter(benchmark::State& state) {
  const auto v = polygon(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(polyline_diameter(v));
}

void BM_diameter_serial(benchmark::State& state) {
  const auto v = polygon(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(polyline_diameter_serial(v));
}

}  // namespace

BENCHMARK(BM_rasterize)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_rasterize_serial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_diameter)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_diameter_serial)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
