#include <algorithm>
#include <cmath>

#include "skytrack/error.hpp"
#include "skytrack/kernels.hpp"

namespace skytrack::kernels {

namespace detail {

double smooth_one(std::span<const double> values, std::span<const double> times, std::size_t i, std::size_t lo,
                  std::size_t hi, double sigma) {
  const double twoSigma2 = 2.0 * sigma * sigma;
  double num = 0, den = 0;
  for (std::size_t j = lo; j < hi; ++j) {
    double dt = times[j] - times[i];
    double w = std::exp(-(dt * dt) / twoSigma2);
    num += w * values[j];
    den += w;
  }
  return num / den;
}

TerrainSample terrain_one(GeoPoint p, const TerrainCache& terrain, const PolygonSet& land) {
  try {
    auto r = terrain_elevation(p, terrain, land);
    return {r.elevationFt, r.source, false};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::MissingTerrain) throw;
    return {0.0, DemSource::OCEAN, true};
  }
}

}  // namespace detail

namespace serial {

void points_in_polygon(std::span<const GeoPoint> pts, const GeoPolygon& poly, std::span<std::uint8_t> inside) {
  for (std::size_t i = 0; i < pts.size(); ++i) inside[i] = point_in_polygon(pts[i], poly) ? 1 : 0;
}

void gaussian_smooth(std::span<const double> values, std::span<const double> times, double window, double sigma,
                     std::span<double> out) {
  const double half = window / 2.0;
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    while (times[i] - times[lo] > half) ++lo;
    if (hi < i + 1) hi = i + 1;
    while (hi < values.size() && times[hi] - times[i] <= half) ++hi;
    out[i] = detail::smooth_one(values, times, i, lo, hi, sigma);
  }
}

void terrain_elevations(std::span<const GeoPoint> pts, const TerrainCache& terrain, const PolygonSet& land,
                        std::span<TerrainSample> out) {
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = detail::terrain_one(pts[i], terrain, land);
}

}  // namespace serial
}  // namespace skytrack::kernels
