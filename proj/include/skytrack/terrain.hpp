#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skytrack/geo.hpp"

namespace skytrack {

enum class DemSource { SRTM3, GLOBE, OCEAN };

std::string_view to_string(DemSource s);

/// One elevation raster. Samples are row-major from the northern row down.
/// Sample (r, c) sits at (north_node_lat() - r / nodesPerDegree,
/// west_node_lon() + c / nodesPerDegree).
struct DemTile {
  DemSource source = DemSource::SRTM3;
  double swCornerLat = 0;  // tile extent, degrees
  double swCornerLon = 0;
  double heightDeg = 1;
  double widthDeg = 1;
  int resolutionArcSec = 3;
  int rows = 0;
  int cols = 0;
  std::vector<std::int16_t> samples;  // metres
  std::int16_t voidValue = -32768;

  int nodes_per_degree() const { return 3600 / resolutionArcSec; }
  /// SRTM nodes sit on the tile edges; GLOBE samples are cell centres.
  double north_node_lat() const;
  double west_node_lon() const;

  std::int16_t at(int r, int c) const { return samples[static_cast<std::size_t>(r) * cols + c]; }
  bool is_void(int r, int c) const { return source == DemSource::SRTM3 && at(r, c) == voidValue; }
  /// Whether the tile's sample grid (clamped to its extent) serves p.
  bool covers(GeoPoint p) const;
};

inline constexpr int kSrtm3Size = 1201;
inline constexpr std::int16_t kSrtmVoid = -32768;
inline constexpr std::int16_t kGlobeOcean = -500;

/// One of the sixteen published GLOBE tiles ("a10g" .. "p10g").
struct GlobeTileSpec {
  char letter;
  double south, north, west, east;
  int rows;
  int cols;
};
std::span<const GlobeTileSpec> globe_catalog();
const GlobeTileSpec* globe_tile_for(GeoPoint p);
const GlobeTileSpec* globe_tile_by_corner(GeoPoint swCorner);

/// Decodes raw tile bytes. SRTM3 is big-endian 1201x1201; GLOBE is
/// little-endian with the published extents of the tile whose south-west
/// corner is `swCorner`. Throws Error(CorruptTile) on a size mismatch.
DemTile load_dem_tile(std::span<const std::byte> bytes, DemSource source, GeoPoint swCorner);
DemTile load_dem_tile(std::string_view bytes, DemSource source, GeoPoint swCorner);

/// Raw encoding of a tile, the inverse of load_dem_tile. Used by fixture tools.
std::string encode_dem_tile(const DemTile& tile);

/// "N40W075" style SRTM name for the tile containing p.
std::string srtm_tile_name(int latFloor, int lonFloor);

struct ElevationQueryResult {
  double elevationFt = 0;
  DemSource source = DemSource::OCEAN;
};

/// Bilinear sample of one tile in metres. Void corners are replaced by the
/// mean of the non-void ones; an all-void cell returns nullopt.
std::optional<double> sample_tile_m(const DemTile& tile, GeoPoint p);

/// Read-mostly tile store. Tiles are decoded on first use from
///   <root>/srtm3/N40W075.hgt[.gz]   and   <root>/globe/a10g[.gz]
/// with single-flight loading: concurrent misses for one tile wait on a
/// single loader. Tiles may also be inserted directly.
class TerrainCache {
 public:
  TerrainCache() = default;
  explicit TerrainCache(std::filesystem::path root) : root_(std::move(root)) {}

  void insert(DemTile tile);

  /// SRTM3 preferred over GLOBE. Throws Error(MissingTerrain) when no tile
  /// covers p or the covering cell is entirely void.
  ElevationQueryResult elevation_at(GeoPoint p) const;

  std::size_t loaded_tiles() const;

 private:
  using TilePtr = std::shared_ptr<const DemTile>;
  TilePtr get(const std::string& key, DemSource source, GeoPoint swCorner) const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_future<TilePtr>> tiles_;
};

/// Land test first: ocean points are {0 ft, OCEAN} without touching the DEMs.
ElevationQueryResult elevation_at(GeoPoint p, const TerrainCache& terrain);
ElevationQueryResult terrain_elevation(GeoPoint p, const TerrainCache& terrain, const PolygonSet& land);

}  // namespace skytrack
