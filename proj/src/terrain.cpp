#include "skytrack/terrain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "skytrack/error.hpp"
#include "skytrack/textio.hpp"
#include "skytrack/units.hpp"

namespace skytrack {

namespace {

constexpr int kGlobeCols = 10800;

constexpr std::array<GlobeTileSpec, 16> kGlobeTiles = {{
    {'a', 50, 90, -180, -90, 4800, kGlobeCols},  {'b', 50, 90, -90, 0, 4800, kGlobeCols},
    {'c', 50, 90, 0, 90, 4800, kGlobeCols},      {'d', 50, 90, 90, 180, 4800, kGlobeCols},
    {'e', 0, 50, -180, -90, 6000, kGlobeCols},   {'f', 0, 50, -90, 0, 6000, kGlobeCols},
    {'g', 0, 50, 0, 90, 6000, kGlobeCols},       {'h', 0, 50, 90, 180, 6000, kGlobeCols},
    {'i', -50, 0, -180, -90, 6000, kGlobeCols},  {'j', -50, 0, -90, 0, 6000, kGlobeCols},
    {'k', -50, 0, 0, 90, 6000, kGlobeCols},      {'l', -50, 0, 90, 180, 6000, kGlobeCols},
    {'m', -90, -50, -180, -90, 4800, kGlobeCols}, {'n', -90, -50, -90, 0, 4800, kGlobeCols},
    {'o', -90, -50, 0, 90, 4800, kGlobeCols},    {'p', -90, -50, 90, 180, 4800, kGlobeCols},
}};

// Snap grid coordinates that are a rounding error away from a node.
double snap(double x) {
  double r = std::round(x);
  return std::fabs(x - r) < 1e-6 ? r : x;
}

}  // namespace

std::string_view to_string(DemSource s) {
  switch (s) {
    case DemSource::SRTM3: return "SRTM3";
    case DemSource::GLOBE: return "GLOBE";
    case DemSource::OCEAN: return "OCEAN";
  }
  return "?";
}

double DemTile::north_node_lat() const {
  double north = swCornerLat + heightDeg;
  return source == DemSource::GLOBE ? north - 0.5 / nodes_per_degree() : north;
}

double DemTile::west_node_lon() const {
  return source == DemSource::GLOBE ? swCornerLon + 0.5 / nodes_per_degree() : swCornerLon;
}

bool DemTile::covers(GeoPoint p) const {
  double lon = wrap_lon(p.lon);
  if (swCornerLon + widthDeg >= 180.0 && p.lon == 180.0) lon = 180.0;
  return p.lat >= swCornerLat && p.lat <= swCornerLat + heightDeg && lon >= swCornerLon &&
         lon <= swCornerLon + widthDeg;
}

std::span<const GlobeTileSpec> globe_catalog() { return kGlobeTiles; }

const GlobeTileSpec* globe_tile_for(GeoPoint p) {
  double lon = wrap_lon(p.lon);
  for (const auto& t : kGlobeTiles)
    if (p.lat >= t.south && p.lat <= t.north && lon >= t.west && lon <= t.east) return &t;
  return nullptr;
}

const GlobeTileSpec* globe_tile_by_corner(GeoPoint sw) {
  for (const auto& t : kGlobeTiles)
    if (t.south == sw.lat && t.west == sw.lon) return &t;
  return nullptr;
}

DemTile load_dem_tile(std::span<const std::byte> bytes, DemSource source, GeoPoint swCorner) {
  DemTile tile;
  tile.source = source;
  tile.swCornerLat = swCorner.lat;
  tile.swCornerLon = swCorner.lon;
  bool bigEndian = true;
  if (source == DemSource::SRTM3) {
    tile.rows = tile.cols = kSrtm3Size;
    tile.resolutionArcSec = 3;
    tile.heightDeg = tile.widthDeg = 1;
    tile.voidValue = kSrtmVoid;
  } else if (source == DemSource::GLOBE) {
    const GlobeTileSpec* spec = globe_tile_by_corner(swCorner);
    if (!spec) throw Error(ErrorKind::CorruptTile, "no GLOBE tile has its south-west corner there");
    tile.rows = spec->rows;
    tile.cols = spec->cols;
    tile.resolutionArcSec = 30;
    tile.heightDeg = spec->north - spec->south;
    tile.widthDeg = spec->east - spec->west;
    tile.voidValue = kGlobeOcean;
    bigEndian = false;
  } else {
    throw Error(ErrorKind::CorruptTile, "OCEAN is not a tile source");
  }
  const std::size_t n = static_cast<std::size_t>(tile.rows) * static_cast<std::size_t>(tile.cols);
  if (bytes.size() != n * 2)
    throw Error(ErrorKind::CorruptTile, "tile has " + std::to_string(bytes.size()) + " bytes, expected " +
                                            std::to_string(n * 2));
  tile.samples.resize(n);
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < n; ++i) {
    unsigned hi = bigEndian ? b[2 * i] : b[2 * i + 1];
    unsigned lo = bigEndian ? b[2 * i + 1] : b[2 * i];
    tile.samples[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>((hi << 8) | lo));
  }
  return tile;
}

DemTile load_dem_tile(std::string_view bytes, DemSource source, GeoPoint swCorner) {
  return load_dem_tile(std::as_bytes(std::span(bytes.data(), bytes.size())), source, swCorner);
}

std::string encode_dem_tile(const DemTile& tile) {
  std::string out(tile.samples.size() * 2, '\0');
  bool bigEndian = tile.source == DemSource::SRTM3;
  for (std::size_t i = 0; i < tile.samples.size(); ++i) {
    auto u = static_cast<std::uint16_t>(tile.samples[i]);
    char hi = static_cast<char>(u >> 8), lo = static_cast<char>(u & 0xFF);
    out[2 * i] = bigEndian ? hi : lo;
    out[2 * i + 1] = bigEndian ? lo : hi;
  }
  return out;
}

std::string srtm_tile_name(int latFloor, int lonFloor) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%02d%c%03d", latFloor >= 0 ? 'N' : 'S', std::abs(latFloor), lonFloor >= 0 ? 'E' : 'W',
                std::abs(lonFloor));
  return buf;
}

std::optional<double> sample_tile_m(const DemTile& tile, GeoPoint p) {
  const double npd = tile.nodes_per_degree();
  double lon = wrap_lon(p.lon);
  if (lon < tile.swCornerLon) lon += 360.0;
  double fr = snap((tile.north_node_lat() - p.lat) * npd);
  double fc = snap((lon - tile.west_node_lon()) * npd);
  fr = std::clamp(fr, 0.0, static_cast<double>(tile.rows - 1));
  fc = std::clamp(fc, 0.0, static_cast<double>(tile.cols - 1));
  int r0 = std::min(static_cast<int>(fr), tile.rows - 2);
  int c0 = std::min(static_cast<int>(fc), tile.cols - 2);
  double fy = fr - r0, fx = fc - c0;

  std::array<std::pair<int, int>, 4> idx = {{{r0, c0}, {r0, c0 + 1}, {r0 + 1, c0}, {r0 + 1, c0 + 1}}};
  std::array<double, 4> v{};
  std::array<bool, 4> isVoid{};
  double sum = 0;
  int good = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    auto [r, c] = idx[k];
    std::int16_t s = tile.at(r, c);
    if (tile.source == DemSource::GLOBE && s == kGlobeOcean) s = 0;
    isVoid[k] = tile.is_void(r, c);
    v[k] = s;
    if (!isVoid[k]) {
      sum += s;
      ++good;
    }
  }
  if (good == 0) return std::nullopt;
  if (good < 4)
    for (std::size_t k = 0; k < 4; ++k)
      if (isVoid[k]) v[k] = sum / good;

  // lerp form keeps the result inside the corner range and exact at nodes
  double top = v[0] + (v[1] - v[0]) * fx;
  double bottom = v[2] + (v[3] - v[2]) * fx;
  return top + (bottom - top) * fy;
}

void TerrainCache::insert(DemTile tile) {
  std::string key;
  if (tile.source == DemSource::SRTM3) {
    key = "srtm3/" + srtm_tile_name(static_cast<int>(std::floor(tile.swCornerLat)),
                                    static_cast<int>(std::floor(tile.swCornerLon)));
  } else {
    const GlobeTileSpec* spec = globe_tile_by_corner({tile.swCornerLat, tile.swCornerLon});
    if (!spec) throw Error(ErrorKind::CorruptTile, "GLOBE tile with unpublished extent");
    key = "globe/" + std::string(1, spec->letter);
  }
  std::promise<TilePtr> pr;
  pr.set_value(std::make_shared<const DemTile>(std::move(tile)));
  std::lock_guard lock(mu_);
  tiles_[key] = pr.get_future().share();
}

std::size_t TerrainCache::loaded_tiles() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [k, f] : tiles_)
    if (f.wait_for(std::chrono::seconds(0)) == std::future_status::ready && f.get()) ++n;
  return n;
}

TerrainCache::TilePtr TerrainCache::get(const std::string& key, DemSource source, GeoPoint swCorner) const {
  std::promise<TilePtr> pr;
  std::shared_future<TilePtr> pending;
  {
    std::lock_guard lock(mu_);
    auto it = tiles_.find(key);
    if (it == tiles_.end()) tiles_.emplace(key, pr.get_future().share());
    else pending = it->second;
  }
  if (pending.valid()) return pending.get();

  // this thread is the single loader for `key`
  TilePtr tile;
  try {
    if (!root_.empty()) {
      std::filesystem::path base = root_ / key;
      if (source == DemSource::SRTM3) base += ".hgt";
      for (auto candidate : {base, std::filesystem::path(base.string() + ".gz")}) {
        if (std::filesystem::exists(candidate)) {
          tile = std::make_shared<const DemTile>(load_dem_tile(text::read_file(candidate), source, swCorner));
          break;
        }
      }
    }
    pr.set_value(tile);
  } catch (...) {
    pr.set_exception(std::current_exception());
    throw;
  }
  return tile;
}

ElevationQueryResult TerrainCache::elevation_at(GeoPoint p) const {
  int latFloor = static_cast<int>(std::floor(p.lat));
  int lonFloor = static_cast<int>(std::floor(wrap_lon(p.lon)));
  if (latFloor >= -60 && latFloor < 60) {
    auto srtm = get("srtm3/" + srtm_tile_name(latFloor, lonFloor), DemSource::SRTM3,
                    {static_cast<double>(latFloor), static_cast<double>(lonFloor)});
    if (srtm && srtm->covers(p))
      if (auto m = sample_tile_m(*srtm, p)) return {units::meters_to_feet(*m), DemSource::SRTM3};
  }
  if (const GlobeTileSpec* spec = globe_tile_for(p)) {
    auto globe = get("globe/" + std::string(1, spec->letter), DemSource::GLOBE, {spec->south, spec->west});
    if (globe && globe->covers(p))
      if (auto m = sample_tile_m(*globe, p)) return {units::meters_to_feet(*m), DemSource::GLOBE};
  }
  throw Error(ErrorKind::MissingTerrain, "no terrain covers " + text::fmt(p.lat) + "," + text::fmt(p.lon));
}

ElevationQueryResult elevation_at(GeoPoint p, const TerrainCache& terrain) { return terrain.elevation_at(p); }

ElevationQueryResult terrain_elevation(GeoPoint p, const TerrainCache& terrain, const PolygonSet& land) {
  if (is_over_ocean(p, land)) return {0.0, DemSource::OCEAN};
  return terrain.elevation_at(p);
}

}  // namespace skytrack
