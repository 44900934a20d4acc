#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP variant with identical per-element arithmetic, so the two agree
// bit for bit; tests hold them to that and bench/ compares their speed.

#include <cstdint>
#include <span>

#include "skytrack/geo.hpp"
#include "skytrack/terrain.hpp"

namespace skytrack::kernels {

struct TerrainSample {
  double elevationFt = 0;
  DemSource source = DemSource::OCEAN;
  bool missing = false;
};

namespace serial {

void points_in_polygon(std::span<const GeoPoint> pts, const GeoPolygon& poly, std::span<std::uint8_t> inside);

/// out_i = sum w_j x_j / sum w_j over |t_j - t_i| <= window / 2, with
/// w_j = exp(-(t_j - t_i)^2 / (2 sigma^2)). `times` strictly increasing.
void gaussian_smooth(std::span<const double> values, std::span<const double> times, double window, double sigma,
                     std::span<double> out);

void terrain_elevations(std::span<const GeoPoint> pts, const TerrainCache& terrain, const PolygonSet& land,
                        std::span<TerrainSample> out);

}  // namespace serial

namespace omp {

void points_in_polygon(std::span<const GeoPoint> pts, const GeoPolygon& poly, std::span<std::uint8_t> inside);
void gaussian_smooth(std::span<const double> values, std::span<const double> times, double window, double sigma,
                     std::span<double> out);
void terrain_elevations(std::span<const GeoPoint> pts, const TerrainCache& terrain, const PolygonSet& land,
                        std::span<TerrainSample> out);

}  // namespace omp

/// Below this many elements the OpenMP variants just call the serial ones.
inline constexpr std::size_t kParallelThreshold = 4096;

}  // namespace skytrack::kernels
