// Serial reference vs OpenMP for the data-parallel kernels.
//   OMP_NUM_THREADS=4 ./skytrack_bench --benchmark_filter=Smooth

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "skytrack/geo.hpp"
#include "skytrack/kernels.hpp"
#include "skytrack/terrain.hpp"

using namespace skytrack;

namespace {

std::vector<GeoPoint> random_points(std::size_t n, double lat0, double lon0, double span) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, span);
  std::vector<GeoPoint> pts(n);
  for (auto& p : pts) p = {lat0 + u(rng), lon0 + u(rng)};
  return pts;
}

GeoPolygon circle_polygon(int vertices) {
  std::vector<GeoPoint> ring;
  for (int k = 0; k < vertices; ++k) {
    double a = 2 * M_PI * k / vertices;
    ring.push_back({40 + 5 * std::sin(a), -80 + 8 * std::cos(a)});
  }
  return GeoPolygon(ring);
}

template <auto Kernel>
void BM_PointsInPolygon(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 34, -90, 12);
  const auto poly = circle_polygon(64);
  std::vector<std::uint8_t> inside(pts.size());
  for (auto _ : state) {
    Kernel(pts, poly, inside);
    benchmark::DoNotOptimize(inside.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_GaussianSmooth(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0, 30);
  std::vector<double> t(n), v(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i);
    v[i] = 3000 + 200 * std::sin(static_cast<double>(i) / 300) + noise(rng);
  }
  for (auto _ : state) {
    Kernel(v, t, 30.0, 6.0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

const TerrainCache& bench_terrain() {
  static TerrainCache cache;
  [[maybe_unused]] static const bool loaded = [] {
    for (int lat = 40; lat < 42; ++lat)
      for (int lon = -75; lon < -73; ++lon) {
        DemTile t;
        t.swCornerLat = lat;
        t.swCornerLon = lon;
        t.rows = t.cols = kSrtm3Size;
        t.samples.resize(static_cast<std::size_t>(kSrtm3Size) * kSrtm3Size);
        for (std::size_t i = 0; i < t.samples.size(); ++i) t.samples[i] = static_cast<std::int16_t>(i % 1500);
        cache.insert(std::move(t));
      }
    return true;
  }();
  return cache;
}

template <auto Kernel>
void BM_TerrainElevations(benchmark::State& state) {
  const auto& terrain = bench_terrain();
  const PolygonSet land{{GeoPolygon({{40, -75}, {42, -75}, {42, -73}, {40, -73}}), {}}};
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 40, -75, 2);
  std::vector<kernels::TerrainSample> out(pts.size());
  for (auto _ : state) {
    Kernel(pts, terrain, land, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_PointsInPolygon<kernels::serial::points_in_polygon>)->Name("PointsInPolygon/serial")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_PointsInPolygon<kernels::omp::points_in_polygon>)->Name("PointsInPolygon/omp")->Range(1 << 12, 1 << 20)->UseRealTime();
BENCHMARK(BM_GaussianSmooth<kernels::serial::gaussian_smooth>)->Name("GaussianSmooth/serial")->Range(1 << 10, 1 << 16);
BENCHMARK(BM_GaussianSmooth<kernels::omp::gaussian_smooth>)->Name("GaussianSmooth/omp")->Range(1 << 10, 1 << 16)->UseRealTime();
BENCHMARK(BM_TerrainElevations<kernels::serial::terrain_elevations>)->Name("TerrainElevations/serial")->Range(1 << 12, 1 << 18);
BENCHMARK(BM_TerrainElevations<kernels::omp::terrain_elevations>)->Name("TerrainElevations/omp")->Range(1 << 12, 1 << 18)->UseRealTime();

BENCHMARK_MAIN();
