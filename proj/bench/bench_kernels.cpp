// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "medlab/innermetric.hpp"
#include "medlab/medial.hpp"
#include "medlab/probes.hpp"

using namespace medlab;

namespace {

const SpatialIndex& cusp_index() {
  static const SpatialIndex index = [] {
    ShapeSpec spec;
    spec.kind = ShapeKind::cusp;
    return SpatialIndex(sample_shape(*make_shape(spec), 40000, 1));
  }();
  return index;
}

const std::vector<Vec>& queries() {
  static const std::vector<Vec> qs = [] {
    Rng rng(5);
    std::vector<Vec> out;
    for (int i = 0; i < 20000; ++i) out.push_back(rng.in_box(cusp_index().bounds()));
    return out;
  }();
  return qs;
}

GridSpec cusp_grid(int n) {
  GridSpec grid;
  grid.box = {make_vec({0.0, -0.2}), make_vec({0.6, 0.2})};
  grid.resolution = {n, n};
  return grid;
}

void BM_BatchDistance(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(batch_distance(cusp_index(), queries()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(queries().size()));
}

void BM_BatchDistanceSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(batch_distance_serial(cusp_index(), queries()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(queries().size()));
}

void BM_ScanMedial(benchmark::State& state) {
  const auto grid = cusp_grid(static_cast<int>(state.range(0)));
  const auto thr = Thresholds::defaults_for(cusp_index());
  for (auto _ : state) benchmark::DoNotOptimize(scan_medial(cusp_index(), grid, thr));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.node_count()));
}

void BM_ScanMedialSerial(benchmark::State& state) {
  const auto grid = cusp_grid(static_cast<int>(state.range(0)));
  const auto thr = Thresholds::defaults_for(cusp_index());
  for (auto _ : state) benchmark::DoNotOptimize(scan_medial_serial(cusp_index(), grid, thr));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.node_count()));
}

ProbeRegion certified_region(const ClosestPointOracle& oracle) {
  auto region = ProbeRegion::ball(make_vec({0.5, 0.5}), 0.1);
  certify_region(oracle, region, Thresholds::defaults_for(oracle));
  return region;
}

void BM_Lipschitz(benchmark::State& state) {
  static const ProbeRegion region = certified_region(cusp_index());
  const auto thr = Thresholds::defaults_for(cusp_index());
  for (auto _ : state) benchmark::DoNotOptimize(lipschitz_quotient(cusp_index(), region, 2000, 3, thr));
}

void BM_LipschitzSerial(benchmark::State& state) {
  static const ProbeRegion region = certified_region(cusp_index());
  const auto thr = Thresholds::defaults_for(cusp_index());
  for (auto _ : state) benchmark::DoNotOptimize(lipschitz_quotient_serial(cusp_index(), region, 2000, 3, thr));
}

void BM_InnerDistances(benchmark::State& state) {
  static const GeodesicGraph graph(cusp_index(), 4.0 * cusp_index().resolution());
  Rng rng(8);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int i = 0; i < 32; ++i) {
    pairs.emplace_back(cusp_index().point(rng.index(cusp_index().size())),
                       cusp_index().point(rng.index(cusp_index().size())));
  }
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(parallel ? inner_distances(graph, pairs) : inner_distances_serial(graph, pairs));
  }
}

void BM_KdNearest(benchmark::State& state) {
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(cusp_index().nearest(queries()[i++ % queries().size()]));
}

void BM_LinearNearest(benchmark::State& state) {
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(cusp_index().nearest_linear(queries()[i++ % queries().size()]));
}

}  // namespace

BENCHMARK(BM_BatchDistance)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchDistanceSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanMedial)->Arg(41)->Arg(101)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanMedialSerial)->Arg(41)->Arg(101)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Lipschitz)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LipschitzSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InnerDistances)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KdNearest);
BENCHMARK(BM_LinearNearest);

BENCHMARK_MAIN();
