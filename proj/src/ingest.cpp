#include "skytrack/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>

#include "skytrack/error.hpp"
#include "skytrack/kernels.hpp"
#include "skytrack/textio.hpp"
#include "skytrack/units.hpp"

namespace skytrack {

namespace {

int find_column(const std::vector<std::string>& header, std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (text::trim(header[i]) == name) return static_cast<int>(i);
  return -1;
}

void append_opt(std::string& out, const std::optional<double>& v) {
  if (v) out += text::fmt(*v);
}

}  // namespace

HourParse parse_hour_file(std::string_view bytes, const HourSchema& schema) {
  HourParse out;
  text::LineReader lines(bytes);
  std::string_view line;
  do {
    if (!lines.next(line)) return out;
  } while (text::trim(line).empty());

  auto header = text::split_record(line, schema.delimiter);
  struct Col {
    const std::string& name;
    int idx;
  };
  int cTime = find_column(header, schema.time), cIcao = find_column(header, schema.icao24),
      cLat = find_column(header, schema.lat), cLon = find_column(header, schema.lon),
      cVel = find_column(header, schema.velocity), cHdg = find_column(header, schema.heading),
      cVr = find_column(header, schema.vertrate), cBaro = find_column(header, schema.baroaltitude),
      cGeo = find_column(header, schema.geoaltitude), cGnd = find_column(header, schema.onground),
      cLpu = find_column(header, schema.lastposupdate);
  for (auto [name, idx] : {Col{schema.time, cTime}, Col{schema.icao24, cIcao}, Col{schema.lat, cLat},
                           Col{schema.lon, cLon}, Col{schema.velocity, cVel}, Col{schema.heading, cHdg},
                           Col{schema.vertrate, cVr}, Col{schema.baroaltitude, cBaro}, Col{schema.geoaltitude, cGeo},
                           Col{schema.onground, cGnd}})
    if (idx < 0) throw Error(ErrorKind::Input, "hourly file lacks column '" + name + "'");
  const auto required = static_cast<std::size_t>(std::max({cTime, cIcao, cLat, cLon, cVel, cHdg, cVr, cBaro, cGeo, cGnd}));

  while (lines.next(line)) {
    if (text::trim(line).empty()) continue;
    auto row = text::split_record(line, schema.delimiter);
    if (row.size() <= required) {
      ++out.malformed;
      continue;
    }
    auto t = text::parse_int(row[cTime]);
    auto icao = Icao24::parse(row[cIcao]);
    if (!t || *t <= 0 || !icao) {
      ++out.malformed;
      continue;
    }
    StateVector sv;
    sv.time = *t;
    sv.icao24 = *icao;
    bool ok = true;
    auto num = [&](int col, std::optional<double>& dst) {
      auto f = text::trim(row[col]);
      if (f.empty() || f == "null" || f == "NaN" || f == "nan") return;
      dst = text::parse_double(f);
      if (!dst) ok = false;
    };
    num(cLat, sv.lat);
    num(cLon, sv.lon);
    num(cVel, sv.groundSpeed);
    num(cHdg, sv.track);
    num(cVr, sv.verticalRate);
    num(cBaro, sv.baroAlt);
    num(cGeo, sv.geoAlt);
    auto gnd = text::parse_bool(row[cGnd]);
    if (!gnd) ok = false;
    else sv.onGround = *gnd;
    if (cLpu >= 0 && static_cast<std::size_t>(cLpu) < row.size()) {
      auto f = text::trim(row[cLpu]);
      if (!f.empty() && f != "null") {
        auto v = text::parse_double(f);
        if (v) sv.lastPositionUpdate = static_cast<std::int64_t>(*v);
      }
    }
    if (!ok) {
      ++out.malformed;
      continue;
    }
    out.records.push_back(sv);
  }
  return out;
}

FilterResult quality_filter(std::vector<StateVector> records) {
  FilterResult out;
  out.kept.reserve(records.size());
  for (auto& r : records) {
    bool good = r.lat && r.lon && *r.lat >= -90 && *r.lat <= 90 && *r.lon >= -180 && *r.lon <= 180 &&
                (r.baroAlt || r.geoAlt);
    if (good) out.kept.push_back(std::move(r));
    else ++out.dropped;
  }
  return out;
}

FilterResult collapse_duplicates(std::vector<StateVector> records) {
  std::stable_sort(records.begin(), records.end(), [](const StateVector& a, const StateVector& b) {
    return a.icao24 != b.icao24 ? a.icao24 < b.icao24 : a.time < b.time;
  });
  FilterResult out;
  out.kept.reserve(records.size());
  for (auto& r : records) {
    if (!out.kept.empty() && out.kept.back().icao24 == r.icao24 && out.kept.back().time == r.time) {
      ++out.dropped;
      auto& prev = out.kept.back();
      if (r.lastPositionUpdate.value_or(INT64_MIN) > prev.lastPositionUpdate.value_or(INT64_MIN)) prev = r;
      continue;
    }
    out.kept.push_back(std::move(r));
  }
  return out;
}

StateVector convert_units(const StateVector& m) {
  StateVector out = m;
  if (m.groundSpeed) out.groundSpeed = units::mps_to_knots(*m.groundSpeed);
  if (m.verticalRate) out.verticalRate = units::mps_to_fpm(*m.verticalRate);
  if (m.baroAlt) out.baroAlt = units::meters_to_feet(*m.baroAlt);
  if (m.geoAlt) out.geoAlt = units::meters_to_feet(*m.geoAlt);
  return out;
}

FilterResult geo_filter(std::vector<StateVector> records, const GeoPolygon& polygon) {
  std::vector<GeoPoint> pts(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    pts[i] = records[i].lat && records[i].lon ? GeoPoint{*records[i].lat, *records[i].lon} : GeoPoint{1000, 1000};
  std::vector<std::uint8_t> inside(records.size());
  kernels::omp::points_in_polygon(pts, polygon, inside);
  FilterResult out;
  out.kept.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (inside[i]) out.kept.push_back(std::move(records[i]));
    else ++out.dropped;
  }
  return out;
}

std::string format_organized(std::span<const StateVector> records) {
  std::string out(kOrganizedHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.time);
    out += ',';
    append_opt(out, r.lat);
    out += ',';
    append_opt(out, r.lon);
    out += ',';
    append_opt(out, r.baroAlt);
    out += ',';
    append_opt(out, r.geoAlt);
    out += ',';
    append_opt(out, r.groundSpeed);
    out += ',';
    append_opt(out, r.track);
    out += ',';
    append_opt(out, r.verticalRate);
    out += ',';
    out += r.onGround ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::vector<StateVector> parse_organized(std::string_view bytes, Icao24 icao24) {
  std::vector<StateVector> out;
  text::LineReader lines(bytes);
  std::string_view line;
  if (!lines.next(line)) return out;
  if (text::trim(line) != kOrganizedHeader) throw Error(ErrorKind::Input, "organized file has an unexpected header");
  while (lines.next(line)) {
    if (text::trim(line).empty()) continue;
    auto f = text::split_record(line, ',');
    if (f.size() != 9) throw Error(ErrorKind::Input, "organized row has " + std::to_string(f.size()) + " fields");
    StateVector r;
    auto t = text::parse_int(f[0]);
    if (!t) throw Error(ErrorKind::Input, "organized row without time");
    r.time = *t;
    r.icao24 = icao24;
    r.lat = text::parse_double(f[1]);
    r.lon = text::parse_double(f[2]);
    r.baroAlt = text::parse_double(f[3]);
    r.geoAlt = text::parse_double(f[4]);
    r.groundSpeed = text::parse_double(f[5]);
    r.track = text::parse_double(f[6]);
    r.verticalRate = text::parse_double(f[7]);
    r.onGround = text::trim(f[8]) == "1";
    out.push_back(r);
  }
  return out;
}

HourFileStats write_organized(std::span<const StateVector> records, const RegistryLookup& lookup,
                              const Hierarchy& hierarchy, const HourStamp& hour, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  HourFileStats stats;
  stats.hour = hour;

  std::map<Icao24, std::vector<StateVector>> byAircraft;
  for (const auto& r : records) byAircraft[r.icao24].push_back(r);

  std::vector<Icao24> unknown;
  for (const auto& [addr, recs] : byAircraft)
    if (!classify(addr, hour.year, lookup).known()) unknown.push_back(addr);  // ascending: map order
  auto unknownRanges = partition_icao_ranges(unknown);

  std::vector<fs::path> created;
  try {
    for (auto& [addr, recs] : byAircraft) {
      std::stable_sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
      auto cls = classify(addr, hour.year, lookup);
      const IcaoRange* range = cls.known() ? hierarchy.range_for(cls, addr) : find_range(unknownRanges, addr);
      if (!range) throw Error(ErrorKind::Config, "no range directory for " + addr.str() + " in " + std::to_string(hierarchy.year()));
      auto dir = root / derive_path(cls, hour.year, hour, *range).relative();
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
      auto file = dir / organized_file_name(hour, addr);
      text::write_file_atomic(file, format_organized(recs));
      created.push_back(file);
      stats.organizedCount += recs.size();
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& f : created) fs::remove(f, ec);
    throw;
  }
  stats.filesWritten = created.size();
  return stats;
}

HourFileStats organize_hour_file(const std::filesystem::path& file, const RegistryLookup& lookup,
                                 const Hierarchy& hierarchy, const GeoPolygon& polygon,
                                 const std::filesystem::path& root, const HourSchema& schema) {
  auto t0 = std::chrono::steady_clock::now();
  auto parsed = parse_hour_file(text::read_file(file), schema);
  auto hour = hour_stamp_from_name(file.filename().string());
  if (!hour) {
    if (parsed.records.empty()) throw Error(ErrorKind::Input, "cannot tell the hour of " + file.string());
    hour = HourStamp::from_unix(parsed.records.front().time);
  }

  HourFileStats stats;
  stats.rawCount = parsed.records.size();
  stats.malformedRows = parsed.malformed;

  auto q = quality_filter(std::move(parsed.records));
  auto d = collapse_duplicates(std::move(q.kept));
  stats.qualityDropped = q.dropped + d.dropped;
  for (auto& r : d.kept) r = convert_units(r);
  auto g = geo_filter(std::move(d.kept), polygon);
  stats.geoDropped = g.dropped;

  auto written = write_organized(g.kept, lookup, hierarchy, *hour, root);
  stats.organizedCount = written.organizedCount;
  stats.filesWritten = written.filesWritten;
  stats.hour = *hour;
  stats.elapsedSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!stats.balanced()) throw Error(ErrorKind::Verification, "hour " + hour->label() + " counts do not balance");
  return stats;
}

}  // namespace skytrack
