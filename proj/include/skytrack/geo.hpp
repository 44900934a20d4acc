#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skytrack {

struct GeoPoint {
  double lat = 0;
  double lon = 0;

  bool operator==(const GeoPoint&) const = default;
};

/// Closed ring in the lat/lon plane, stored counterclockwise without the
/// repeated closing vertex. Longitudes are unwrapped so consecutive vertices
/// never jump across the antimeridian; a ring crossing it may therefore hold
/// longitudes beyond +/-180.
class GeoPolygon {
 public:
  GeoPolygon() = default;
  /// Throws Error(Geometry) for fewer than three distinct vertices or zero area.
  explicit GeoPolygon(std::vector<GeoPoint> ring);

  std::span<const GeoPoint> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }

  double min_lat() const { return minLat_; }
  double max_lat() const { return maxLat_; }
  double min_lon() const { return minLon_; }
  double max_lon() const { return maxLon_; }

  /// Signed area in square degrees (positive: counterclockwise).
  double signed_area() const;
  bool is_convex() const;
  /// O(n^2) edge-pair scan.
  bool is_simple() const;

  bool operator==(const GeoPolygon& o) const { return vertices_ == o.vertices_; }

 private:
  std::vector<GeoPoint> vertices_;
  double minLat_ = 0, maxLat_ = 0, minLon_ = 0, maxLon_ = 0;
};

/// Outer ring with optional holes (land masses with lakes, etc.).
struct PolygonWithHoles {
  GeoPolygon outer;
  std::vector<GeoPolygon> holes;
};

using PolygonSet = std::vector<PolygonWithHoles>;

/// Andrew's monotone chain in plate carree coordinates. Collinear boundary
/// points are dropped. Throws Error(Geometry) when fewer than three
/// non-collinear points exist.
GeoPolygon convex_hull(std::span<const GeoPoint> points);

/// Offsets every hull vertex outward along the bisector of its incident edges
/// by great-circle travel and re-hulls the union of old and moved vertices.
/// Reaches are then grown until every original vertex and edge lies at least
/// `distanceNm` (great-circle) inside the result. Throws Error(Geometry) for
/// non-convex input.
GeoPolygon buffer_polygon(const GeoPolygon& poly, double distanceNm);

/// Boundary counts as inside.
bool point_in_polygon(GeoPoint p, const GeoPolygon& poly);
bool point_in_polygon(GeoPoint p, const PolygonWithHoles& poly);

/// True iff p lies in no land polygon.
bool is_over_ocean(GeoPoint p, const PolygonSet& land);

// Great-circle helpers on a spherical earth (R = 3440.065 NM).
double distance_nm(GeoPoint a, GeoPoint b);
double initial_bearing_deg(GeoPoint from, GeoPoint to);
GeoPoint destination(GeoPoint from, double bearingDeg, double distanceNm);

/// Wraps to [-180, 180).
double wrap_lon(double lon);

/// GeoJSON Polygon / MultiPolygon geometries, bare or inside Feature(Collection)s.
PolygonSet read_geojson_polygons(std::string_view json);
std::string to_geojson(const GeoPolygon& poly);
/// "lat lon" per line with the closing vertex repeated; plots directly in gnuplot.
std::string to_plot_text(const GeoPolygon& poly);

}  // namespace skytrack
