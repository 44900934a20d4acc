#include "skytrack/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "skytrack/error.hpp"
#include "skytrack/textio.hpp"

namespace skytrack {

namespace {

constexpr double kEarthRadiusNm = 3440.065;
constexpr double kDeg = std::numbers::pi / 180.0;

// z of (b - a) x (c - a) with x = lon, y = lat
double cross(GeoPoint a, GeoPoint b, GeoPoint c) {
  return (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
}

bool on_segment(GeoPoint p, GeoPoint a, GeoPoint b) {
  if (cross(a, b, p) != 0.0) return false;
  return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) && p.lat >= std::min(a.lat, b.lat) &&
         p.lat <= std::max(a.lat, b.lat);
}

// Winding-number test on one ring; boundary is inside.
bool ring_contains(GeoPoint p, std::span<const GeoPoint> ring) {
  int winding = 0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    GeoPoint a = ring[i], b = ring[(i + 1) % n];
    if (on_segment(p, a, b)) return true;
    if (a.lat <= p.lat) {
      if (b.lat > p.lat && cross(a, b, p) > 0) ++winding;
    } else if (b.lat <= p.lat && cross(a, b, p) < 0) {
      --winding;
    }
  }
  return winding != 0;
}

bool segments_intersect(GeoPoint a, GeoPoint b, GeoPoint c, GeoPoint d) {
  double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b);
}

}  // namespace

double wrap_lon(double lon) {
  double w = std::fmod(lon + 180.0, 360.0);
  if (w < 0) w += 360.0;
  return w - 180.0;
}

GeoPolygon::GeoPolygon(std::vector<GeoPoint> ring) {
  std::vector<GeoPoint> v;
  v.reserve(ring.size());
  for (const auto& p : ring) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90 || p.lat > 90)
      throw Error(ErrorKind::Geometry, "polygon vertex out of range");
    GeoPoint q = p;
    if (!v.empty()) {
      // unwrap relative to the previous vertex
      double prev = v.back().lon;
      while (q.lon - prev > 180.0) q.lon -= 360.0;
      while (q.lon - prev < -180.0) q.lon += 360.0;
      if (q == v.back()) continue;
    }
    v.push_back(q);
  }
  while (v.size() > 1 && v.front().lat == v.back().lat && std::fmod(std::fabs(v.front().lon - v.back().lon), 360.0) == 0.0)
    v.pop_back();
  if (v.size() < 3) throw Error(ErrorKind::Geometry, "polygon needs at least three distinct vertices");
  vertices_ = std::move(v);
  double area = signed_area();
  if (area == 0.0) throw Error(ErrorKind::Geometry, "polygon has zero area");
  if (area < 0) std::reverse(vertices_.begin(), vertices_.end());
  minLat_ = maxLat_ = vertices_[0].lat;
  minLon_ = maxLon_ = vertices_[0].lon;
  for (const auto& p : vertices_) {
    minLat_ = std::min(minLat_, p.lat);
    maxLat_ = std::max(maxLat_, p.lat);
    minLon_ = std::min(minLon_, p.lon);
    maxLon_ = std::max(maxLon_, p.lon);
  }
}

double GeoPolygon::signed_area() const {
  double a = 0;
  for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
    const auto& p = vertices_[i];
    const auto& q = vertices_[(i + 1) % n];
    a += p.lon * q.lat - q.lon * p.lat;
  }
  return a / 2.0;
}

bool GeoPolygon::is_convex() const {
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i)
    if (cross(vertices_[i], vertices_[(i + 1) % n], vertices_[(i + 2) % n]) < 0) return false;
  return true;
}

bool GeoPolygon::is_simple() const {
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // adjacent edges share a vertex by construction
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j], vertices_[(j + 1) % n])) return false;
    }
  }
  return true;
}

GeoPolygon convex_hull(std::span<const GeoPoint> points) {
  std::vector<GeoPoint> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const GeoPoint& a, const GeoPoint& b) {
    return a.lon < b.lon || (a.lon == b.lon && a.lat < b.lat);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw Error(ErrorKind::Geometry, "convex hull needs three non-collinear points");

  std::vector<GeoPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw Error(ErrorKind::Geometry, "convex hull input is collinear");
  return GeoPolygon(std::move(hull));
}

namespace {

// Outward displacements of one vertex: the bisector direction, split into
// several pieces at sharp corners so no piece turns more than 90 degrees.
void displace_vertex(GeoPoint prev, GeoPoint cur, GeoPoint next, double reachNm, std::vector<GeoPoint>& out) {
  // local east/north frame at the vertex
  double k = std::cos(cur.lat * kDeg);
  auto normal = [k](GeoPoint a, GeoPoint b) {
    double dx = (b.lon - a.lon) * k, dy = b.lat - a.lat;
    double len = std::hypot(dx, dy);
    return std::pair{dy / len, -dx / len};  // right of travel = outward for a ccw ring
  };
  auto [n1x, n1y] = normal(prev, cur);
  auto [n2x, n2y] = normal(cur, next);
  double a1 = std::atan2(n1y, n1x);
  double turn = std::atan2(n1x * n2y - n1y * n2x, n1x * n2x + n1y * n2y);  // ccw turn from n1 to n2
  if (turn < 0) turn = 0;
  int pieces = std::max(1, static_cast<int>(std::ceil(turn / (std::numbers::pi / 2) - 1e-12)));
  double half = turn / (2.0 * pieces);
  double reach = reachNm / std::cos(half);
  for (int j = 0; j < pieces; ++j) {
    double ang = a1 + (2 * j + 1) * half;
    double bearing = std::atan2(std::cos(ang), std::sin(ang)) / kDeg;  // from north, clockwise
    GeoPoint moved = destination(cur, bearing, reach);
    // keep the moved vertex on the same sheet as the unwrapped ring
    while (moved.lon - cur.lon > 180.0) moved.lon -= 360.0;
    while (moved.lon - cur.lon < -180.0) moved.lon += 360.0;
    out.push_back(moved);
  }
}

// Great-circle distance from p to the nearest point of the straight lat/lon
// segment ab, by golden-section search along the segment.
double distance_to_segment_nm(GeoPoint p, GeoPoint a, GeoPoint b) {
  auto at = [&](double t) { return distance_nm(p, {a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon)}); };
  const double g = (std::sqrt(5.0) - 1) / 2;
  double lo = 0, hi = 1;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = at(x1), f2 = at(x2);
  for (int i = 0; i < 60; ++i) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - g * (hi - lo), f1 = at(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + g * (hi - lo), f2 = at(x2);
    }
  }
  return std::min({at(0), at(1), f1, f2});
}

double clearance_nm(GeoPoint p, const GeoPolygon& poly) {
  auto v = poly.vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) best = std::min(best, distance_to_segment_nm(p, v[j], v[i]));
  return best;
}

}  // namespace

GeoPolygon buffer_polygon(const GeoPolygon& poly, double distanceNm) {
  if (distanceNm < 0) throw Error(ErrorKind::Geometry, "negative buffer distance");
  if (!poly.is_convex()) throw Error(ErrorKind::Geometry, "buffering requires a convex polygon");
  if (distanceNm == 0) return poly;

  auto v = poly.vertices();
  const std::size_t n = v.size();
  // Plate carree chords between displaced vertices sag slightly relative to
  // true distance away from the equator; grow the per-vertex reach until every
  // vertex and edge sample clears the result by the full distance.
  std::vector<double> reach(n, distanceNm);
  GeoPolygon result;
  constexpr int kEdgeSamples = 8;
  for (int round = 0; round < 8; ++round) {
    std::vector<GeoPoint> out(v.begin(), v.end());
    for (std::size_t i = 0; i < n; ++i) displace_vertex(v[(i + n - 1) % n], v[i], v[(i + 1) % n], reach[i], out);
    result = convex_hull(out);

    std::vector<double> grow(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t next = (i + 1) % n;
      for (int s = 0; s < kEdgeSamples; ++s) {
        double t = static_cast<double>(s) / kEdgeSamples;
        GeoPoint p{v[i].lat + t * (v[next].lat - v[i].lat), v[i].lon + t * (v[next].lon - v[i].lon)};
        double c = clearance_nm(p, result);
        if (c >= distanceNm) continue;
        double f = distanceNm / std::max(c, 1e-9 * distanceNm) * (1 + 1e-6);
        grow[i] = std::max(grow[i], f);
        if (s > 0) grow[next] = std::max(grow[next], f);
      }
    }
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i)
      if (grow[i] > 1.0) reach[i] *= grow[i], changed = true;
    if (!changed) break;
  }
  return result;
}

bool point_in_polygon(GeoPoint p, const GeoPolygon& poly) {
  if (poly.empty() || p.lat < poly.min_lat() || p.lat > poly.max_lat()) return false;
  for (double shift : {0.0, 360.0, -360.0}) {
    GeoPoint q{p.lat, p.lon + shift};
    if (q.lon < poly.min_lon() || q.lon > poly.max_lon()) continue;
    if (ring_contains(q, poly.vertices())) return true;
  }
  return false;
}

bool point_in_polygon(GeoPoint p, const PolygonWithHoles& poly) {
  if (!point_in_polygon(p, poly.outer)) return false;
  for (const auto& h : poly.holes) {
    if (!point_in_polygon(p, h)) continue;
    // hole boundary still belongs to the land polygon
    bool onEdge = false;
    auto ring = h.vertices();
    for (std::size_t i = 0; i < ring.size() && !onEdge; ++i)
      onEdge = on_segment(p, ring[i], ring[(i + 1) % ring.size()]);
    if (!onEdge) return false;
  }
  return true;
}

bool is_over_ocean(GeoPoint p, const PolygonSet& land) {
  for (const auto& poly : land)
    if (point_in_polygon(p, poly)) return false;
  return true;
}

double distance_nm(GeoPoint a, GeoPoint b) {
  double p1 = a.lat * kDeg, p2 = b.lat * kDeg;
  double dp = p2 - p1, dl = (b.lon - a.lon) * kDeg;
  double h = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2 * kEarthRadiusNm * std::asin(std::min(1.0, std::sqrt(h)));
}

double initial_bearing_deg(GeoPoint from, GeoPoint to) {
  double p1 = from.lat * kDeg, p2 = to.lat * kDeg, dl = (to.lon - from.lon) * kDeg;
  double y = std::sin(dl) * std::cos(p2);
  double x = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  double b = std::atan2(y, x) / kDeg;
  return b < 0 ? b + 360.0 : b;
}

GeoPoint destination(GeoPoint from, double bearingDeg, double distanceNm) {
  double d = distanceNm / kEarthRadiusNm, th = bearingDeg * kDeg;
  double p1 = from.lat * kDeg, l1 = from.lon * kDeg;
  double p2 = std::asin(std::sin(p1) * std::cos(d) + std::cos(p1) * std::sin(d) * std::cos(th));
  double l2 = l1 + std::atan2(std::sin(th) * std::sin(d) * std::cos(p1), std::cos(d) - std::sin(p1) * std::sin(p2));
  return {p2 / kDeg, wrap_lon(l2 / kDeg)};
}

// ---------------------------------------------------------------------------
// GeoJSON

namespace {

using nlohmann::json;

GeoPolygon ring_from_json(const json& ring) {
  std::vector<GeoPoint> pts;
  for (const auto& c : ring) {
    if (!c.is_array() || c.size() < 2) throw Error(ErrorKind::Input, "bad GeoJSON coordinate");
    pts.push_back({c[1].get<double>(), c[0].get<double>()});
  }
  return GeoPolygon(std::move(pts));
}

PolygonWithHoles polygon_from_json(const json& rings) {
  if (!rings.is_array() || rings.empty()) throw Error(ErrorKind::Input, "empty GeoJSON polygon");
  PolygonWithHoles p{ring_from_json(rings[0]), {}};
  for (std::size_t i = 1; i < rings.size(); ++i) p.holes.push_back(ring_from_json(rings[i]));
  return p;
}

void collect(const json& j, PolygonSet& out) {
  auto type = j.value("type", std::string());
  if (type == "FeatureCollection") {
    for (const auto& f : j.at("features")) collect(f, out);
  } else if (type == "Feature") {
    if (j.contains("geometry") && !j["geometry"].is_null()) collect(j["geometry"], out);
  } else if (type == "GeometryCollection") {
    for (const auto& g : j.at("geometries")) collect(g, out);
  } else if (type == "Polygon") {
    out.push_back(polygon_from_json(j.at("coordinates")));
  } else if (type == "MultiPolygon") {
    for (const auto& rings : j.at("coordinates")) out.push_back(polygon_from_json(rings));
  }
}

}  // namespace

PolygonSet read_geojson_polygons(std::string_view text) {
  PolygonSet out;
  try {
    collect(json::parse(text), out);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Input, std::string("GeoJSON: ") + e.what());
  }
  return out;
}

std::string to_geojson(const GeoPolygon& poly) {
  json ring = json::array();
  for (const auto& p : poly.vertices()) ring.push_back({p.lon, p.lat});
  ring.push_back({poly.vertices()[0].lon, poly.vertices()[0].lat});
  json j = {{"type", "Feature"},
            {"properties", json::object()},
            {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}}};
  return j.dump(1) + "\n";
}

std::string to_plot_text(const GeoPolygon& poly) {
  std::ostringstream os;
  for (const auto& p : poly.vertices()) os << text::fmt(p.lat) << ' ' << text::fmt(p.lon) << '\n';
  os << text::fmt(poly.vertices()[0].lat) << ' ' << text::fmt(poly.vertices()[0].lon) << '\n';
  return os.str();
}

}  // namespace skytrack
