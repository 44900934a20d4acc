#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "skytrack/archive.hpp"
#include "skytrack/error.hpp"
#include "skytrack/textio.hpp"
#include "skytrack/tracks.hpp"
#include "skytrack/units.hpp"
#include "skytrack/zip.hpp"
#include "support.hpp"

using namespace skytrack;
namespace fs = std::filesystem;

namespace {

TrackPoint tp(double t, double alt = 1000, double speed = 100, double course = 90) {
  TrackPoint p;
  p.time = t;
  p.lat = 40 + t * 1e-4;
  p.lon = -74;
  p.altMSL = alt;
  p.speed = speed;
  p.course = course;
  return p;
}

// Sort-based median and MAD, independent of the library's selection.
std::vector<std::uint8_t> mad_oracle(std::vector<double> x, double k, double floor) {
  std::vector<std::uint8_t> m(x.size(), 0);
  if (x.size() < 3) return m;
  auto med = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
  };
  double c = med(x);
  std::vector<double> d;
  for (double v : x) d.push_back(std::fabs(v - c));
  double mad = med(d);
  for (std::size_t i = 0; i < x.size(); ++i) m[i] = mad == 0 ? (d[i] > floor && d[i] > 0) : d[i] > k * 1.4826 * mad;
  return m;
}

double direct_smooth(const std::vector<double>& x, const std::vector<double>& t, std::size_t i, double window, double sigma) {
  double num = 0, den = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double dt = t[j] - t[i];
    if (std::fabs(dt) > window / 2) continue;
    double w = std::exp(-dt * dt / (2 * sigma * sigma));
    num += w * x[j];
    den += w;
  }
  return num / den;
}

}  // namespace

TEST_CASE("track points from observations") {
  auto sv = [](std::int64_t t) {
    StateVector s;
    s.time = t;
    s.lat = 40;
    s.lon = -74;
    s.baroAlt = 900;
    s.geoAlt = 1000;
    s.groundSpeed = 100;
    s.track = 10;
    return s;
  };
  std::vector<StateVector> v{sv(5), sv(3), sv(4), sv(4), sv(6), sv(7), sv(8)};
  v[4].geoAlt.reset();
  v[5].onGround = true;
  v[6].track.reset();
  std::size_t dropped = 0;
  auto pts = to_track_points(v, &dropped);
  REQUIRE(pts.size() == 4);
  CHECK(dropped == 3);
  CHECK(pts[0].time == 3);
  CHECK(pts[0].altMSL == 1000);
  CHECK(pts[3].altMSL == 900);  // barometric fallback
}

TEST_CASE("dedupe positions") {
  std::vector<TrackPoint> hold(5, tp(0));
  for (int i = 0; i < 5; ++i) hold[i].time = i;
  CHECK(dedupe_positions(hold).size() == 1);
  CHECK(dedupe_positions(hold)[0].time == 0);

  std::vector<TrackPoint> moving;
  for (int i = 0; i < 20; ++i) moving.push_back(tp(i));
  CHECK(dedupe_positions(moving).size() == 20);

  // move, hold 3, move, hold 2, move: 1 + 1 + 1 + 1 + 1 distinct runs
  std::vector<TrackPoint> mixed{tp(0), tp(1), tp(1), tp(1), tp(4), tp(5), tp(5), tp(7)};
  for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i].time = static_cast<double>(i);
  auto d = dedupe_positions(mixed);
  CHECK(d.size() == 5);
  CHECK(d[2].time == 4);  // earliest of the hold is kept
}

TEST_CASE("segmentation") {
  OutlierParams params;
  std::vector<TrackPoint> pts;
  for (int i = 0; i < 30; ++i) pts.push_back(tp(i * 10.0 + (i >= 9 ? 300 : 0)));
  auto s = segment(pts, params);
  REQUIRE(s.segments.size() == 1);
  CHECK(s.segments[0].size() == 21);
  CHECK(s.discarded == 1);

  std::vector<TrackPoint> cont;
  for (int i = 0; i < 100; ++i) cont.push_back(tp(i * 5.0));
  CHECK(segment(cont, params).segments.size() == 1);

  std::vector<TrackPoint> nine(cont.begin(), cont.begin() + 9);
  auto z = segment(nine, params);
  CHECK(z.segments.empty());
  CHECK(z.discarded == 1);

  // exactly maxGap apart stays together
  CHECK(segment(std::vector{tp(0), tp(60)}, OutlierParams{.minPoints = 2}).segments.size() == 1);
}

TEST_CASE("MAD outliers: worked example and degenerate cases") {
  std::vector<double> x{100, 102, 98, 101, 99, 500};
  auto m = mad_outliers(x);
  CHECK(m == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1});
  CHECK(m == mad_oracle(x, 1.5, 25));

  CHECK(mad_outliers(std::vector<double>(50, 1234.0)) == std::vector<std::uint8_t>(50, 0));
  CHECK(mad_outliers(std::vector<double>{1, 1e6}) == std::vector<std::uint8_t>{0, 0});

  // zero MAD: only deviations above the floor are flagged
  std::vector<double> q{1000, 1000, 1000, 1000, 1020, 1030};
  CHECK(mad_outliers(q, 1.5, 25) == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1});
}

TEST_CASE("MAD outliers match a sort-based oracle and are invariant") {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<int> len(3, 500), kind(0, 2);
  std::normal_distribution<double> noise(0, 50);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(len(rng)));
    for (auto& v : x) {
      switch (kind(rng)) {
        case 0: v = 3000 + noise(rng); break;
        case 1: v = std::round(3000 + noise(rng) / 25) * 25; break;  // quantized, ties likely
        default: v = 3000 + (u(rng) < 0.05 ? 5000 * u(rng) : noise(rng)); break;
      }
    }
    auto m = mad_outliers(x);
    REQUIRE(m == mad_oracle(x, 1.5, 25));

    // shift and scale by powers of two keep the arithmetic exact
    std::vector<double> shifted = x, scaled = x;
    for (auto& v : shifted) v += 1024;
    for (auto& v : scaled) v *= 4;
    REQUIRE(mad_outliers(shifted) == m);
    REQUIRE(mad_outliers(scaled, 1.5, 100) == m);
  }
}

TEST_CASE("gaussian smoothing") {
  std::vector<double> t{0, 10, 20}, x{0, 10, 20};
  auto out = gaussian_smooth(x, t, 30, 6);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(direct_smooth(x, t, i, 30, 6)).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(10).epsilon(1e-12));
  // closed form for the first sample: neighbours at 10 s are inside the 15 s half window, 20 s is not
  double w = std::exp(-100.0 / 72.0);
  CHECK(out[0] == doctest::Approx(10 * w / (1 + w)).epsilon(1e-12));

  CHECK(gaussian_smooth(std::vector<double>{7}, std::vector<double>{3}, 30, 6) == std::vector<double>{7});
  std::vector<double> c(40, 123.25), tc(40);
  for (std::size_t i = 0; i < tc.size(); ++i) tc[i] = static_cast<double>(i) * 3;
  for (double v : gaussian_smooth(c, tc, 30, 6)) CHECK(v == doctest::Approx(123.25).epsilon(1e-15));

  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> step(0.5, 9), val(-100, 100);
  std::vector<double> tr(500), xr(500);
  double now = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) tr[i] = now += step(rng), xr[i] = val(rng);
  auto sr = gaussian_smooth(xr, tr, 30, 6);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t j = 0; j < tr.size(); ++j)
      if (std::fabs(tr[j] - tr[i]) <= 15) lo = std::min(lo, xr[j]), hi = std::max(hi, xr[j]);
    REQUIRE(sr[i] >= lo - 1e-12);
    REQUIRE(sr[i] <= hi + 1e-12);
    REQUIRE(sr[i] == doctest::Approx(direct_smooth(xr, tr, i, 30, 6)).epsilon(1e-12));
  }
}

TEST_CASE("numerical gradient") {
  std::vector<double> t{0, 1, 2, 3}, sq{0, 1, 4, 9};
  auto g = numerical_gradient(sq, t);
  CHECK(g[1] == 2.0);
  CHECK(g[2] == 4.0);
  CHECK(g[0] == 1.0);
  CHECK(g[3] == 5.0);

  std::vector<double> tl, lin, flat;
  double now = 0;
  for (int i = 0; i < 50; ++i) {
    now += 1 + (i % 3);
    tl.push_back(now);
    lin.push_back(10 * now);
    flat.push_back(42);
  }
  for (double v : numerical_gradient(lin, tl)) CHECK(v == 10.0);
  for (double v : numerical_gradient(flat, tl)) CHECK(v == 0.0);
  CHECK(numerical_gradient(std::vector<double>{3}, std::vector<double>{1}) == std::vector<double>{0});
}

TEST_CASE("speed ceilings by class") {
  OutlierParams params;
  std::vector<TrackPoint> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(tp(i, 1000, 200));
  pts[3].speed = 260;
  auto rc = rate_outlier_filter(pts, AircraftClass::Rotorcraft, params);
  REQUIRE(rc);
  CHECK(rc->size() == 11);

  pts[3].speed = 599;
  auto me = rate_outlier_filter(pts, AircraftClass::FixedWingMultiEngine, params);
  REQUIRE(me);
  CHECK(me->size() == 12);

  for (int i = 0; i < 4; ++i) pts[static_cast<std::size_t>(i)].speed = 300;
  CHECK_FALSE(rate_outlier_filter(pts, AircraftClass::Rotorcraft, params));

  CHECK(params.ceiling(AircraftClass::Rotorcraft) == 250);
  CHECK(params.ceiling(AircraftClass::FixedWingMultiEngine) == 600);
  CHECK(params.ceiling(AircraftClass::FixedWingSingleEngine) == 400);
  CHECK(params.ceiling(AircraftClass::Glider) == 250);
  CHECK(params.ceiling(AircraftClass::Unknown) == 600);
  OutlierParams bad;
  bad.maxGap = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("1 Hz interpolation") {
  std::vector<TrackPoint> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(tp(100 + i, 1000 + i * 7.5, 90 + i, i * 30.0));
  auto same = interpolate_1hz(grid);
  REQUIRE(same.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(same[i].time == grid[i].time);
    CHECK(same[i].altMSL == grid[i].altMSL);
    CHECK(same[i].speed == grid[i].speed);
    CHECK(same[i].course == grid[i].course);
  }

  auto lin = interpolate_1hz(std::vector{tp(0, 1000), tp(10, 2000)});
  REQUIRE(lin.size() == 11);
  CHECK(lin[4].altMSL == doctest::Approx(1400).epsilon(1e-12));

  // 350 -> 10 over 10 s turns through north: midpoint 0, never the long way round
  auto turn = interpolate_1hz(std::vector{tp(0, 1000, 100, 350), tp(10, 1000, 100, 10)});
  CHECK(turn[5].course == doctest::Approx(0).epsilon(1e-12));
  CHECK(turn[2].course == doctest::Approx(354));
  CHECK(turn[8].course == doctest::Approx(6));
  for (const auto& p : turn) {
    CHECK(p.course >= 0);
    CHECK(p.course < 360);
    CHECK(std::fabs(p.course - 180) > 150);
  }

  // fractional endpoints span [ceil, floor]
  auto frac = interpolate_1hz(std::vector{tp(0.4), tp(5.5), tp(12.7)});
  REQUIRE(frac.size() == 12);
  CHECK(frac.front().time == 1);
  CHECK(frac.back().time == 12);
  for (std::size_t i = 1; i < frac.size(); ++i) CHECK(frac[i].time - frac[i - 1].time == 1.0);

  CHECK(interpolate_1hz(std::vector{tp(0)}).empty());
}

TEST_CASE("interpolation reproduces integer-time samples") {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> gap(1, 9);
  std::uniform_real_distribution<double> v(0, 359.9);
  std::vector<TrackPoint> pts;
  double t = 1000;
  for (int i = 0; i < 300; ++i) pts.push_back(tp(t += gap(rng), v(rng) * 10, v(rng), v(rng)));
  auto out = interpolate_1hz(pts);
  std::map<double, const TrackPoint*> byTime;
  for (const auto& p : out) byTime[p.time] = &p;
  for (const auto& p : pts) {
    REQUIRE(byTime.count(p.time));
    CHECK(std::fabs(byTime[p.time]->altMSL - p.altMSL) <= 1e-9);
    CHECK(std::fabs(byTime[p.time]->speed - p.speed) <= 1e-9);
    CHECK(std::fabs(byTime[p.time]->course - p.course) <= 1e-9);
  }
}

TEST_CASE("AGL") {
  TerrainCache cache;
  cache.insert(testutil::srtm_tile(40, -75, [](int r, int) { return static_cast<std::int16_t>(r < 600 ? 305 : 100); }));
  PolygonSet land{{GeoPolygon({{40, -75}, {41, -75}, {41, -74.5}, {40, -74.5}}), {}}};

  std::vector<TrackPoint> pts{tp(0), tp(1), tp(2)};
  pts[0].lat = 40.2, pts[0].lon = -74.2, pts[0].altMSL = 500;  // ocean
  pts[1].lat = 40.9, pts[1].lon = -74.9, pts[1].altMSL = 3500;
  pts[2].lat = 40.05, pts[2].lon = -74.9, pts[2].altMSL = 200;  // below 100 m terrain
  attach_agl(pts, cache, land);
  CHECK(pts[0].altAGL == 500);
  CHECK(pts[0].terrainSource == DemSource::OCEAN);
  CHECK(pts[0].agl == AglStatus::Ok);
  double terrainFt = units::meters_to_feet(305);
  CHECK(pts[1].altAGL == 3500 - terrainFt);
  CHECK(pts[2].agl == AglStatus::BelowGround);
  CHECK(pts[2].altAGL < 0);
  for (const auto& p : pts) {
    auto e = terrain_elevation({p.lat, p.lon}, cache, land);
    CHECK(p.altMSL - p.altAGL == doctest::Approx(e.elevationFt).epsilon(1e-12));
  }

  std::vector<TrackPoint> off{tp(0)};
  off[0].lat = 40.5, off[0].lon = -80;
  PolygonSet wide{{GeoPolygon({{30, -90}, {50, -90}, {50, -70}, {30, -70}}), {}}};
  attach_agl(off, cache, wide);
  CHECK(off[0].agl == AglStatus::Missing);
}

TEST_CASE("airspace classification") {
  CHECK(classify_airspace(tp(0), {}) == Airspace::Other);
  auto vols = parse_airspace_volumes(
      "# nested shelves\n"
      "B 0 10000 circle 40.6,-73.8 20\n"
      "C 0 4000 circle 40.6,-73.8 5\n"
      "D 0 2500 40.0,-75.0 40.0,-74.8 40.2,-74.8 40.2,-75.0\n");
  REQUIRE(vols.size() == 3);
  TrackPoint p = tp(0, 8000);
  p.lat = 40.6, p.lon = -73.6;
  CHECK(classify_airspace(p, vols) == Airspace::B);
  p.altMSL = 12000;
  CHECK(classify_airspace(p, vols) == Airspace::Other);
  p.lat = 40.6, p.lon = -73.8, p.altMSL = 3000;
  CHECK(classify_airspace(p, vols) == Airspace::C);  // innermost wins
  p.lat = 40.1, p.lon = -74.9, p.altMSL = 2500;
  CHECK(classify_airspace(p, vols) == Airspace::D);
  CHECK_THROWS_AS(parse_airspace_volumes("B 100 50 circle 1,1 3\n"), Error);
  CHECK_THROWS_AS(parse_airspace_volumes("X 0 50 circle 1,1 3\n"), Error);
}

namespace {

const fs::path kMixed = testutil::source_dir() / "tests/reference/mixed";

std::map<std::string, std::size_t> read_counts(const fs::path& p) {
  std::map<std::string, std::size_t> out;
  std::string_view line;
  auto body = text::read_file(p);
  text::LineReader r(body);
  while (r.next(line)) {
    auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    out[std::string(line.substr(0, eq))] = static_cast<std::size_t>(*text::parse_int(line.substr(eq + 1)));
  }
  return out;
}

std::vector<StateVector> load_aircraft(const std::string& icao) {
  std::vector<StateVector> recs;
  for (const auto& e : fs::directory_iterator(kMixed)) {
    auto name = parse_organized_file_name(e.path().filename().string());
    if (!name || name->icao24.str() != icao) continue;
    auto part = parse_organized(text::read_file(e.path()), name->icao24);
    recs.insert(recs.end(), part.begin(), part.end());
  }
  std::stable_sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  return recs;
}

}  // namespace

TEST_CASE("mixed fixture matches the reference pipeline") {
  OutlierParams params;
  auto body = text::read_file(kMixed / "expected_points.csv");
  std::map<std::string, std::vector<std::vector<std::string>>> expected;
  text::LineReader lines(body);
  std::string_view line;
  lines.next(line);
  while (lines.next(line)) {
    auto f = text::split_record(line, ',');
    expected[f[0]].push_back(f);
  }

  for (std::string icao : {"A0B001", "C0F002"}) {
    CAPTURE(icao);
    auto recs = load_aircraft(icao);
    TrackCounts c;
    auto segs = process_aircraft(recs, *Icao24::parse(icao), AircraftClass::Rotorcraft, params, {}, &c);
    auto want = read_counts(kMixed / ("expected_" + icao + ".txt"));
    CHECK(c.observations == want["observations"]);
    CHECK(c.rejectedObservations == want["rejected"]);
    CHECK(c.altitudeOutliers == want["altitudeOutliers"]);
    CHECK(c.speedOutliers == want["speedOutliers"]);
    CHECK(c.segmentsDiscarded == want["segmentsDiscarded"]);
    CHECK(c.segments == want["segments"]);
    CHECK(c.points == want["points"]);

    const auto& rows = expected[icao];
    std::size_t k = 0;
    for (std::size_t s = 0; s < segs.size(); ++s) {
      for (const auto& p : segs[s].points) {
        REQUIRE(k < rows.size());
        const auto& r = rows[k++];
        REQUIRE(p.time == *text::parse_double(r[1]));
        CHECK(p.lat == doctest::Approx(*text::parse_double(r[2])).epsilon(1e-12));
        CHECK(p.lon == doctest::Approx(*text::parse_double(r[3])).epsilon(1e-12));
        CHECK(p.altMSL == doctest::Approx(*text::parse_double(r[4])).epsilon(1e-12));
        CHECK(p.speed == doctest::Approx(*text::parse_double(r[5])).epsilon(1e-12));
        CHECK(p.course == doctest::Approx(*text::parse_double(r[6])).epsilon(1e-12));
        CHECK(p.vertRate == doctest::Approx(*text::parse_double(r[7])).scale(100).epsilon(1e-10));
        CHECK(p.accel == doctest::Approx(*text::parse_double(r[8])).scale(1).epsilon(1e-10));
        CHECK(std::to_string(s) == r[9]);
      }
    }
    CHECK(k == rows.size());

    for (const auto& seg : segs) {
      CHECK(seg.points.size() >= params.minPoints);
      for (std::size_t i = 0; i < seg.points.size(); ++i) {
        const auto& p = seg.points[i];
        if (i) CHECK(p.time - seg.points[i - 1].time == 1.0);
        CHECK(std::isfinite(p.vertRate));
        CHECK(std::isfinite(p.accel));
        CHECK(p.speed <= params.ceiling(AircraftClass::Rotorcraft));
        CHECK(p.course >= 0);
        CHECK(p.course < 360);
      }
    }
  }
}

TEST_CASE("process_archive on the mixed fixture") {
  testutil::TempDir dir;
  const fs::path leaf = dir / "org/2020/Rotorcraft/Seats_001_010/A0B001_C0F003";
  fs::create_directories(leaf);
  for (const auto& e : fs::directory_iterator(kMixed))
    if (parse_organized_file_name(e.path().filename().string())) fs::copy_file(e.path(), leaf / e.path().filename());
  auto packed = pack_leaf(leaf, dir / "org", dir / "arc", {});
  REQUIRE(packed);
  const fs::path zipPath = dir / "arc/2020/Rotorcraft/Seats_001_010/A0B001_C0F003.zip";
  REQUIRE(fs::exists(zipPath));

  auto st = process_archive(zipPath, dir / "arc", dir / "proc", {}, {});
  CHECK(st.members == 3);
  CHECK(st.unreadableMembers == 0);
  CHECK(st.aircraft == 2);
  CHECK(st.filesWritten == 2);
  CHECK(st.tracks.segments == 3);
  auto a = read_counts(kMixed / "expected_A0B001.txt");
  auto c = read_counts(kMixed / "expected_C0F002.txt");
  CHECK(st.tracks.points == a["points"] + c["points"]);

  const fs::path out = dir / "proc/2020/Rotorcraft/Seats_001_010/A0B001_2020.csv";
  REQUIRE(fs::exists(out));
  auto rows = parse_processed(text::read_file(out));
  CHECK(rows.size() == a["points"]);
  CHECK(rows.front().segmentId == 0);
  CHECK(rows.back().segmentId == 1);
  for (const auto& r : rows) {
    CHECK(r.altAGL == std::nullopt);  // no terrain supplied
    CHECK(r.airspace == Airspace::Other);
  }
}

TEST_CASE("process_archive edge cases") {
  testutil::TempDir dir;
  // one clean continuous track
  std::vector<StateVector> recs;
  HourStamp h{2020, 5, 1, 12};
  for (int i = 0; i < 120; ++i) {
    StateVector s;
    s.time = h.start_unix() + i * 5;
    s.icao24 = Icao24::from_value(0xA00001);
    s.lat = 40 + i * 1e-3;
    s.lon = -74;
    s.geoAlt = 3000;
    s.groundSpeed = 60;
    s.track = 0;
    recs.push_back(s);
  }
  // a stray member alongside the real one is skipped and counted
  fs::create_directories(dir / "arc/2020/Glider/Seats_001_010");
  std::vector<zip::Blob> members{zip::compress(organized_file_name(h, Icao24::from_value(0xA00001)), format_organized(recs), 6),
                                 zip::compress("notes.txt", "junk", 6)};
  zip::write(dir / "arc/2020/Glider/Seats_001_010/A00001_A00002.zip", members);
  auto st = process_archive(dir / "arc/2020/Glider/Seats_001_010/A00001_A00002.zip", dir / "arc", dir / "proc", {}, {});
  CHECK(st.members == 2);
  CHECK(st.unreadableMembers == 1);
  CHECK(st.filesWritten == 1);
  CHECK(st.tracks.segments == 1);
  CHECK(st.tracks.points == 596);

  // empty archive
  fs::create_directories(dir / "arc/2020/Glider/Seats_011_020");
  zip::write(dir / "arc/2020/Glider/Seats_011_020/A00003_A00004.zip", {});
  auto empty = process_archive(dir / "arc/2020/Glider/Seats_011_020/A00003_A00004.zip", dir / "arc", dir / "proc", {}, {});
  CHECK(empty.members == 0);
  CHECK(empty.filesWritten == 0);
  CHECK(empty.tracks.segments == 0);
  CHECK(empty.tracks.points == 0);

  CHECK_THROWS_AS(process_archive(dir / "arc/2020/Glider/Seats_011_020/A00003_A00004.zip", dir / "arc/2020", dir / "proc", {}, {}),
                  Error);
}
