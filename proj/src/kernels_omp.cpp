#include <omp.h>

#include <algorithm>
#include <exception>

#include "skytrack/kernels.hpp"

namespace skytrack::kernels {

namespace detail {
double smooth_one(std::span<const double> values, std::span<const double> times, std::size_t i, std::size_t lo,
                  std::size_t hi, double sigma);
TerrainSample terrain_one(GeoPoint p, const TerrainCache& terrain, const PolygonSet& land);
}  // namespace detail

namespace omp {

void points_in_polygon(std::span<const GeoPoint> pts, const GeoPolygon& poly, std::span<std::uint8_t> inside) {
  if (pts.size() < kParallelThreshold) return serial::points_in_polygon(pts, poly, inside);
  const auto n = static_cast<std::int64_t>(pts.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) inside[i] = point_in_polygon(pts[i], poly) ? 1 : 0;
}

void gaussian_smooth(std::span<const double> values, std::span<const double> times, double window, double sigma,
                     std::span<double> out) {
  if (values.size() < kParallelThreshold) return serial::gaussian_smooth(values, times, window, sigma, out);
  const double half = window / 2.0;
  const auto n = static_cast<std::int64_t>(values.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    // same window bounds the serial sweep finds
    auto lo = std::lower_bound(times.begin(), times.begin() + i, times[i],
                               [half](double t, double ti) { return ti - t > half; }) -
              times.begin();
    auto hi = std::upper_bound(times.begin() + i + 1, times.end(), times[i],
                               [half](double ti, double t) { return t - ti > half; }) -
              times.begin();
    out[i] = detail::smooth_one(values, times, static_cast<std::size_t>(i), static_cast<std::size_t>(lo),
                                static_cast<std::size_t>(hi), sigma);
  }
}

void terrain_elevations(std::span<const GeoPoint> pts, const TerrainCache& terrain, const PolygonSet& land,
                        std::span<TerrainSample> out) {
  if (pts.size() < kParallelThreshold) return serial::terrain_elevations(pts, terrain, land, out);
  const auto n = static_cast<std::int64_t>(pts.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = detail::terrain_one(pts[i], terrain, land);
    } catch (...) {
#pragma omp critical(skytrack_terrain_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace omp
}  // namespace skytrack::kernels
