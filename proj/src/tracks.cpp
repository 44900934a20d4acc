#include "skytrack/tracks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "skytrack/error.hpp"
#include "skytrack/kernels.hpp"
#include "skytrack/textio.hpp"
#include "skytrack/zip.hpp"

namespace skytrack {

namespace fs = std::filesystem;

std::string_view to_string(Airspace a) {
  switch (a) {
    case Airspace::B: return "B";
    case Airspace::C: return "C";
    case Airspace::D: return "D";
    case Airspace::Other: return "O";
  }
  return "O";
}

std::optional<Airspace> parse_airspace(std::string_view s) {
  s = text::trim(s);
  if (s == "B") return Airspace::B;
  if (s == "C") return Airspace::C;
  if (s == "D") return Airspace::D;
  if (s == "O" || s == "Other") return Airspace::Other;
  return std::nullopt;
}

void OutlierParams::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0)) throw Error(ErrorKind::Config, std::string(what) + " must be positive");
  };
  positive(madThreshold, "mad_threshold");
  positive(smoothWindow, "smooth_window");
  positive(sigma(), "smooth_sigma");
  positive(maxGap, "max_gap");
  if (minPoints < 2) throw Error(ErrorKind::Config, "min_points must be at least 2");
  if (madZeroFloorFt < 0) throw Error(ErrorKind::Config, "mad_zero_floor must not be negative");
  for (auto c : kAllClasses) positive(ceiling(c), "speed ceiling");
}

TrackCounts& TrackCounts::operator+=(const TrackCounts& o) {
  observations += o.observations;
  rejectedObservations += o.rejectedObservations;
  altitudeOutliers += o.altitudeOutliers;
  speedOutliers += o.speedOutliers;
  segmentsDiscarded += o.segmentsDiscarded;
  segments += o.segments;
  points += o.points;
  aglMissing += o.aglMissing;
  belowGround += o.belowGround;
  return *this;
}

std::vector<TrackPoint> to_track_points(std::span<const StateVector> records, std::size_t* dropped) {
  std::vector<TrackPoint> out;
  out.reserve(records.size());
  std::size_t rejected = 0;
  for (const auto& r : records) {
    auto alt = r.geoAlt ? r.geoAlt : r.baroAlt;
    if (r.onGround || !r.lat || !r.lon || !alt || !r.groundSpeed || !r.track) {
      ++rejected;
      continue;
    }
    TrackPoint p;
    p.time = static_cast<double>(r.time);
    p.lat = *r.lat;
    p.lon = *r.lon;
    p.altMSL = *alt;
    p.speed = *r.groundSpeed;
    p.course = *r.track;
    p.vertRate = r.verticalRate.value_or(0.0);
    out.push_back(p);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  // one observation per timestamp
  auto last = std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.time == b.time; });
  rejected += static_cast<std::size_t>(out.end() - last);
  out.erase(last, out.end());
  if (dropped) *dropped = rejected;
  return out;
}

std::vector<TrackPoint> dedupe_positions(std::span<const TrackPoint> pts) {
  std::vector<TrackPoint> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    if (!out.empty() && out.back().lat == p.lat && out.back().lon == p.lon && out.back().altMSL == p.altMSL) continue;
    out.push_back(p);
  }
  return out;
}

SegmentSplit segment(std::span<const TrackPoint> pts, const OutlierParams& params) {
  SegmentSplit out;
  std::vector<TrackPoint> cur;
  auto flush = [&] {
    if (cur.empty()) return;
    if (cur.size() >= params.minPoints) out.segments.push_back(std::move(cur));
    else ++out.discarded;
    cur.clear();
  };
  for (const auto& p : pts) {
    if (!cur.empty() && p.time - cur.back().time > params.maxGap) flush();
    cur.push_back(p);
  }
  flush();
  return out;
}

namespace {

// Median by selection; `v` is scrambled.
double median_inplace(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lo + hi) / 2.0;
}

double angle_delta(double from, double to) {
  double d = std::fmod(to - from + 540.0, 360.0);
  if (d < 0) d += 360.0;
  return d - 180.0;
}

double normalize_deg(double c) {
  c = std::fmod(c, 360.0);
  if (c < 0) c += 360.0;
  if (c >= 360.0) c -= 360.0;
  return c;
}

}  // namespace

std::vector<std::uint8_t> mad_outliers(std::span<const double> series, double threshold, double zeroMadFloor) {
  std::vector<std::uint8_t> mask(series.size(), 0);
  if (series.size() < 3) return mask;
  std::vector<double> work(series.begin(), series.end());
  const double med = median_inplace(work);
  for (std::size_t i = 0; i < series.size(); ++i) work[i] = std::fabs(series[i] - med);
  std::vector<double> dev = work;
  const double mad = median_inplace(work);
  if (mad == 0.0) {
    for (std::size_t i = 0; i < series.size(); ++i) mask[i] = dev[i] > zeroMadFloor && dev[i] > 0.0;
  } else {
    const double bound = threshold * kMadScale * mad;
    for (std::size_t i = 0; i < series.size(); ++i) mask[i] = dev[i] > bound;
  }
  return mask;
}

std::vector<double> gaussian_smooth(std::span<const double> values, std::span<const double> times, double window,
                                    double sigma) {
  std::vector<double> out(values.size());
  kernels::omp::gaussian_smooth(values, times, window, sigma, out);
  return out;
}

std::vector<double> numerical_gradient(std::span<const double> values, std::span<const double> times) {
  const std::size_t n = values.size();
  std::vector<double> g(n, 0.0);
  if (n < 2) return g;
  g[0] = (values[1] - values[0]) / (times[1] - times[0]);
  g[n - 1] = (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]);
  return g;
}

std::optional<std::vector<TrackPoint>> rate_outlier_filter(std::span<const TrackPoint> pts, AircraftClass cls,
                                                           const OutlierParams& params) {
  const double ceiling = params.ceiling(cls);
  std::vector<TrackPoint> out;
  out.reserve(pts.size());
  for (const auto& p : pts)
    if (p.speed <= ceiling) out.push_back(p);
  if (out.size() < params.minPoints) return std::nullopt;
  return out;
}

std::vector<TrackPoint> interpolate_1hz(std::span<const TrackPoint> pts) {
  std::vector<TrackPoint> out;
  if (pts.size() < 2) return out;
  const auto first = static_cast<std::int64_t>(std::ceil(pts.front().time));
  const auto last = static_cast<std::int64_t>(std::floor(pts.back().time));
  if (last < first) return out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  std::size_t k = 0;
  for (std::int64_t t = first; t <= last; ++t) {
    const double td = static_cast<double>(t);
    while (k + 2 < pts.size() && pts[k + 1].time <= td) ++k;
    const TrackPoint& a = pts[k];
    const TrackPoint& b = pts[k + 1];
    TrackPoint p;
    p.time = td;
    if (td == a.time || td == b.time) {
      p = td == a.time ? a : b;
    } else {
      const double f = (td - a.time) / (b.time - a.time);
      auto lerp = [f](double x, double y) { return x + (y - x) * f; };
      p.lat = lerp(a.lat, b.lat);
      p.lon = lerp(a.lon, b.lon);
      p.altMSL = lerp(a.altMSL, b.altMSL);
      p.speed = lerp(a.speed, b.speed);
      p.vertRate = lerp(a.vertRate, b.vertRate);
      p.accel = lerp(a.accel, b.accel);
      p.course = normalize_deg(a.course + angle_delta(a.course, b.course) * f);
    }
    p.time = td;
    p.altAGL = 0;
    p.agl = AglStatus::Missing;
    out.push_back(p);
  }
  return out;
}

void attach_agl(std::span<TrackPoint> pts, const TerrainCache& terrain, const PolygonSet& land) {
  std::vector<GeoPoint> g(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) g[i] = {pts[i].lat, pts[i].lon};
  std::vector<kernels::TerrainSample> s(pts.size());
  kernels::omp::terrain_elevations(g, terrain, land, s);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (s[i].missing) {
      pts[i].agl = AglStatus::Missing;
      pts[i].altAGL = 0;
      continue;
    }
    pts[i].terrainSource = s[i].source;
    pts[i].altAGL = pts[i].altMSL - s[i].elevationFt;
    pts[i].agl = pts[i].altAGL < 0 ? AglStatus::BelowGround : AglStatus::Ok;
  }
}

std::vector<AirspaceVolume> parse_airspace_volumes(std::string_view body) {
  std::vector<AirspaceVolume> out;
  text::LineReader lines(body);
  std::string_view line;
  std::size_t lineNo = 0;
  auto bad = [&](const std::string& why) {
    return Error(ErrorKind::Input, "airspace line " + std::to_string(lineNo) + ": " + why);
  };
  auto parse_point = [&](std::string_view tok) {
    auto comma = tok.find(',');
    if (comma == std::string_view::npos) throw bad("expected lat,lon");
    auto lat = text::parse_double(tok.substr(0, comma)), lon = text::parse_double(tok.substr(comma + 1));
    if (!lat || !lon) throw bad("bad coordinate");
    return GeoPoint{*lat, *lon};
  };
  while (lines.next(line)) {
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<std::string_view> tok;
    for (std::size_t i = 0; i < line.size();) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tok.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tok.empty()) continue;
    if (tok.size() < 4) throw bad("too few fields");
    AirspaceVolume v;
    auto cls = parse_airspace(tok[0]);
    auto floor = text::parse_double(tok[1]), ceil = text::parse_double(tok[2]);
    if (!cls || !floor || !ceil || *ceil < *floor) throw bad("bad class or altitude band");
    v.cls = *cls;
    v.floorFt = *floor;
    v.ceilingFt = *ceil;
    std::vector<GeoPoint> ring;
    if (tok[3] == "circle") {
      if (tok.size() != 6) throw bad("circle needs centre and radius");
      GeoPoint c = parse_point(tok[4]);
      auto r = text::parse_double(tok[5]);
      if (!r || *r <= 0) throw bad("bad radius");
      for (int k = 0; k < 72; ++k) ring.push_back(destination(c, k * 5.0, *r));
    } else {
      for (std::size_t k = 3; k < tok.size(); ++k) ring.push_back(parse_point(tok[k]));
    }
    v.area = GeoPolygon(std::move(ring));
    out.push_back(std::move(v));
  }
  return out;
}

Airspace classify_airspace(const TrackPoint& p, std::span<const AirspaceVolume> volumes) {
  const AirspaceVolume* best = nullptr;
  double bestArea = 0;
  for (const auto& v : volumes) {
    if (p.altMSL < v.floorFt || p.altMSL > v.ceilingFt) continue;
    if (!point_in_polygon(GeoPoint{p.lat, p.lon}, v.area)) continue;
    double area = v.area.signed_area();
    if (!best || area < bestArea) {
      best = &v;
      bestArea = area;
    }
  }
  return best ? best->cls : Airspace::Other;
}

std::vector<TrackSegment> process_aircraft(std::span<const StateVector> records, Icao24 icao24, AircraftClass cls,
                                           const OutlierParams& params, const TrackResources& res,
                                           TrackCounts* counts) {
  TrackCounts c;
  c.observations = records.size();
  auto pts = to_track_points(records, &c.rejectedObservations);
  auto split = segment(dedupe_positions(pts), params);
  c.segmentsDiscarded = split.discarded;

  std::vector<TrackSegment> out;
  for (auto& raw : split.segments) {
    std::vector<double> alt(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) alt[i] = raw[i].altMSL;
    auto mask = mad_outliers(alt, params.madThreshold, params.madZeroFloorFt);
    std::vector<TrackPoint> seg;
    seg.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (mask[i]) ++c.altitudeOutliers;
      else seg.push_back(raw[i]);
    }
    if (seg.size() < params.minPoints) {
      ++c.segmentsDiscarded;
      continue;
    }

    const std::size_t n = seg.size();
    std::vector<double> t(n), a(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = seg[i].time;
      a[i] = seg[i].altMSL;
      v[i] = seg[i].speed;
    }
    if (params.smoothAltitude) a = gaussian_smooth(a, t, params.smoothWindow, params.sigma());
    if (params.smoothSpeed) v = gaussian_smooth(v, t, params.smoothWindow, params.sigma());
    auto climb = numerical_gradient(a, t);  // ft/s
    auto accel = numerical_gradient(v, t);  // kt/s
    for (std::size_t i = 0; i < n; ++i) {
      seg[i].altMSL = a[i];
      seg[i].speed = v[i];
      seg[i].vertRate = climb[i] * 60.0;
      seg[i].accel = accel[i];
    }

    auto kept = rate_outlier_filter(seg, cls, params);
    if (!kept) {
      c.speedOutliers += static_cast<std::size_t>(
          std::count_if(seg.begin(), seg.end(), [&](const auto& p) { return p.speed > params.ceiling(cls); }));
      ++c.segmentsDiscarded;
      continue;
    }
    c.speedOutliers += seg.size() - kept->size();

    auto resampled = interpolate_1hz(*kept);
    if (resampled.size() < params.minPoints) {
      ++c.segmentsDiscarded;
      continue;
    }
    if (res.terrain && res.land) {
      attach_agl(resampled, *res.terrain, *res.land);
    }
    for (auto& p : resampled) {
      p.airspace = classify_airspace(p, res.airspace);
      if (p.agl == AglStatus::Missing) ++c.aglMissing;
      if (p.agl == AglStatus::BelowGround) ++c.belowGround;
    }
    c.points += resampled.size();
    ++c.segments;
    out.push_back({icao24, cls, std::move(resampled)});
  }
  if (counts) *counts += c;
  return out;
}

std::string format_processed(std::span<const TrackSegment> segments) {
  std::string out(kProcessedHeader);
  out += '\n';
  for (std::size_t s = 0; s < segments.size(); ++s) {
    for (const auto& p : segments[s].points) {
      out += std::to_string(static_cast<std::int64_t>(p.time));
      out += ',' + text::fmt_fixed(p.lat, 6);
      out += ',' + text::fmt_fixed(p.lon, 6);
      out += ',' + text::fmt_fixed(p.altMSL, 1);
      out += ',';
      if (p.agl != AglStatus::Missing) out += text::fmt_fixed(p.altAGL, 1);
      out += ',' + text::fmt_fixed(p.speed, 2);
      out += ',' + text::fmt_fixed(p.course, 2);
      out += ',' + text::fmt_fixed(p.vertRate, 1);
      out += ',' + text::fmt_fixed(p.accel, 3);
      out += ',';
      out += to_string(p.airspace);
      out += ',' + std::to_string(s);
      out += '\n';
    }
  }
  return out;
}

std::vector<ProcessedRow> parse_processed(std::string_view bytes) {
  std::vector<ProcessedRow> out;
  text::LineReader lines(bytes);
  std::string_view line;
  if (!lines.next(line)) return out;
  if (text::trim(line) != kProcessedHeader) throw Error(ErrorKind::Input, "processed file has an unexpected header");
  while (lines.next(line)) {
    if (text::trim(line).empty()) continue;
    auto f = text::split_record(line, ',');
    if (f.size() != 11) throw Error(ErrorKind::Input, "processed row has " + std::to_string(f.size()) + " fields");
    ProcessedRow r;
    auto t = text::parse_int(f[0]);
    auto lat = text::parse_double(f[1]), lon = text::parse_double(f[2]), msl = text::parse_double(f[3]);
    auto spd = text::parse_double(f[5]), crs = text::parse_double(f[6]), vr = text::parse_double(f[7]),
         acc = text::parse_double(f[8]);
    auto as = parse_airspace(f[9]);
    auto seg = text::parse_int(f[10]);
    if (!t || !lat || !lon || !msl || !spd || !crs || !vr || !acc || !as || !seg)
      throw Error(ErrorKind::Input, "malformed processed row");
    r.time = *t;
    r.lat = *lat;
    r.lon = *lon;
    r.altMSL = *msl;
    r.altAGL = text::parse_double(f[4]);
    r.speed = *spd;
    r.course = *crs;
    r.vertRate = *vr;
    r.accel = *acc;
    r.airspace = *as;
    r.segmentId = static_cast<int>(*seg);
    out.push_back(r);
  }
  return out;
}

ArchiveProcessStats process_archive(const fs::path& archive, const fs::path& archiveRoot,
                                    const fs::path& processedRoot, const OutlierParams& params,
                                    const TrackResources& res) {
  auto rel = fs::relative(archive, archiveRoot);
  std::vector<std::string> parts;
  for (const auto& p : rel) parts.push_back(p.string());
  if (parts.size() != 4) throw Error(ErrorKind::Input, "archive is not at tier four: " + archive.string());
  auto year = text::parse_int(parts[0]);
  auto cls = parse_class(parts[1]);
  if (!year || !cls) throw Error(ErrorKind::Input, "cannot tell year/class of " + archive.string());

  ArchiveProcessStats stats;
  zip::Reader reader = zip::Reader::open(archive);
  std::map<Icao24, std::vector<StateVector>> byAircraft;
  for (const auto& e : reader.entries()) {
    ++stats.members;
    try {
      auto name = parse_organized_file_name(e.name);
      if (!name) throw Error(ErrorKind::Input, "unexpected member " + e.name);
      auto recs = parse_organized(reader.extract(e), name->icao24);
      auto& dst = byAircraft[name->icao24];
      dst.insert(dst.end(), recs.begin(), recs.end());
    } catch (const Error&) {
      ++stats.unreadableMembers;
    }
  }

  auto outDir = processedRoot / parts[0] / parts[1] / parts[2];
  for (auto& [addr, recs] : byAircraft) {
    ++stats.aircraft;
    std::stable_sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
    auto segs = process_aircraft(recs, addr, *cls, params, res, &stats.tracks);
    if (segs.empty()) continue;
    fs::create_directories(outDir);
    text::write_file_atomic(outDir / (addr.str() + "_" + parts[0] + ".csv"), format_processed(segs));
    ++stats.filesWritten;
  }
  return stats;
}

}  // namespace skytrack
