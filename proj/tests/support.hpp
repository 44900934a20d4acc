#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "skytrack/geo.hpp"
#include "skytrack/terrain.hpp"

namespace testutil {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("skytrack-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path source_dir() { return SKYTRACK_SOURCE_DIR; }

/// Copy of the bundled end-to-end fixture without previous outputs; returns
/// the copied config file.
inline std::filesystem::path copy_e2e_fixture(const std::filesystem::path& dest) {
  const auto src = source_dir() / "fixtures" / "e2e";
  std::filesystem::create_directories(dest);
  for (const auto& e : std::filesystem::directory_iterator(src)) {
    if (e.path().filename() == "out") continue;
    std::filesystem::copy(e.path(), dest / e.path().filename(), std::filesystem::copy_options::recursive);
  }
  return dest / "fixture.cfg";
}

/// Crossing-number test written from scratch; no boundary handling.
inline bool ray_cast(skytrack::GeoPoint p, std::span<const skytrack::GeoPoint> ring) {
  bool in = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = ring[i];
    const auto& b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < x) in = !in;
    }
  }
  return in;
}

/// Distance in degrees (plane) from p to segment ab.
inline double segment_distance(skytrack::GeoPoint p, skytrack::GeoPoint a, skytrack::GeoPoint b) {
  double dx = b.lon - a.lon, dy = b.lat - a.lat;
  double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.lon - a.lon) * dx + (p.lat - a.lat) * dy) / len2 : 0;
  t = std::clamp(t, 0.0, 1.0);
  double ex = a.lon + t * dx - p.lon, ey = a.lat + t * dy - p.lat;
  return std::sqrt(ex * ex + ey * ey);
}

inline double edge_distance(skytrack::GeoPoint p, std::span<const skytrack::GeoPoint> ring) {
  double best = 1e300;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++)
    best = std::min(best, segment_distance(p, ring[j], ring[i]));
  return best;
}

/// Random convex polygon: sorted random angles on a jittered ellipse.
inline skytrack::GeoPolygon random_convex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> nv(3, 24);
  double clat = -50 + 100 * u(rng), clon = -170 + 340 * u(rng);
  double rx = 0.2 + 5 * u(rng), ry = 0.2 + 5 * u(rng);
  std::vector<double> ang(static_cast<std::size_t>(nv(rng)));
  for (auto& a : ang) a = 2 * std::numbers::pi * u(rng);
  std::sort(ang.begin(), ang.end());
  std::vector<skytrack::GeoPoint> ring;
  for (double a : ang) ring.push_back({clat + ry * std::sin(a), clon + rx * std::cos(a)});
  // points on an ellipse in angular order are convex; drop near-duplicates
  std::vector<skytrack::GeoPoint> clean;
  for (const auto& p : ring)
    if (clean.empty() || std::hypot(p.lat - clean.back().lat, p.lon - clean.back().lon) > 1e-6) clean.push_back(p);
  if (clean.size() < 3) return random_convex(rng);
  try {
    return skytrack::GeoPolygon(clean);
  } catch (...) {
    return random_convex(rng);
  }
}

/// SRTM tile whose samples come from f(row, col).
template <class F>
skytrack::DemTile srtm_tile(int latFloor, int lonFloor, F f) {
  skytrack::DemTile t;
  t.source = skytrack::DemSource::SRTM3;
  t.swCornerLat = latFloor;
  t.swCornerLon = lonFloor;
  t.rows = t.cols = skytrack::kSrtm3Size;
  t.resolutionArcSec = 3;
  t.samples.resize(static_cast<std::size_t>(t.rows) * t.cols);
  for (int r = 0; r < t.rows; ++r)
    for (int c = 0; c < t.cols; ++c) t.samples[static_cast<std::size_t>(r) * t.cols + c] = f(r, c);
  return t;
}

/// GLOBE-layout tile (30", cell-centred samples) over a custom extent.
template <class F>
skytrack::DemTile globe_tile(double swLat, double swLon, double heightDeg, double widthDeg, F f) {
  skytrack::DemTile t;
  t.source = skytrack::DemSource::GLOBE;
  t.swCornerLat = swLat;
  t.swCornerLon = swLon;
  t.heightDeg = heightDeg;
  t.widthDeg = widthDeg;
  t.resolutionArcSec = 30;
  t.voidValue = skytrack::kGlobeOcean;
  t.rows = static_cast<int>(std::lround(heightDeg * 120));
  t.cols = static_cast<int>(std::lround(widthDeg * 120));
  t.samples.resize(static_cast<std::size_t>(t.rows) * t.cols);
  for (int r = 0; r < t.rows; ++r)
    for (int c = 0; c < t.cols; ++c) t.samples[static_cast<std::size_t>(r) * t.cols + c] = f(r, c);
  return t;
}

}  // namespace testutil
