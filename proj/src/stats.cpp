#include "skytrack/stats.hpp"

#include <algorithm>
#include <cmath>

#include "skytrack/archive.hpp"
#include "skytrack/error.hpp"
#include "skytrack/textio.hpp"
#include "skytrack/zip.hpp"

namespace skytrack {

namespace fs = std::filesystem;

std::vector<double> BinSpec::edges() const {
  std::vector<double> e;
  for (std::size_t k = 0;; ++k) {
    double x = lo + static_cast<double>(k) * width;
    if (x >= hi) break;
    e.push_back(x);
  }
  e.push_back(hi);
  return e;
}

std::size_t BinSpec::bins() const {
  // number of k with lo + k * width < hi, matching edges()
  auto n = static_cast<std::size_t>(std::max(0.0, std::ceil((hi - lo) / width)));
  while (lo + static_cast<double>(n) * width < hi) ++n;
  while (n > 0 && lo + static_cast<double>(n - 1) * width >= hi) --n;
  return n;
}

std::size_t BinSpec::bin_of(double v) const {
  const std::size_t n = bins();
  if (!(v > lo)) return 0;
  auto k = static_cast<std::size_t>(std::floor((v - lo) / width));
  return std::min(k, n - 1);
}

BinningConfig BinningConfig::parse(std::string_view body) {
  BinningConfig c;
  text::LineReader lines(body);
  std::string_view line;
  while (lines.next(line)) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::Config, "bins: expected key=value: " + std::string(line));
    auto key = text::trim(line.substr(0, eq));
    auto v = text::parse_double(line.substr(eq + 1));
    if (!v) throw Error(ErrorKind::Config, "bins: bad number for " + std::string(key));
    if (key == "altitude_lo") c.altitude.lo = *v;
    else if (key == "altitude_hi") c.altitude.hi = *v;
    else if (key == "altitude_width") c.altitude.width = *v;
    else if (key == "speed_lo") c.speed.lo = *v;
    else if (key == "speed_hi") c.speed.hi = *v;
    else if (key == "speed_width") c.speed.width = *v;
    else if (key == "band_lo") c.bandLoFt = *v;
    else if (key == "band_hi") c.bandHiFt = *v;
    else throw Error(ErrorKind::Config, "bins: unknown key " + std::string(key));
  }
  c.validate();
  return c;
}

void BinningConfig::validate() const {
  for (const auto* b : {&altitude, &speed})
    if (!(b->width > 0) || !(b->hi > b->lo)) throw Error(ErrorKind::Config, "bins: need lo < hi and width > 0");
  if (!(bandHiFt > bandLoFt)) throw Error(ErrorKind::Config, "bins: band_lo must be below band_hi");
}

std::string_view to_string(HistVariable v) {
  return v == HistVariable::AltitudeAgl ? "altitudeAGL_ft" : "speed_kt";
}

double Histogram::total() const {
  double t = 0;
  for (double h : hours) t += h;
  return t;
}

FlightStats::FlightStats(BinningConfig cfg) : cfg_(cfg) { cfg_.validate(); }

FlightStats::Cell& FlightStats::cell_mut(int year, AircraftClass cls) {
  auto& row = cells_[year];
  auto& c = row[static_cast<std::size_t>(cls)];
  if (c.altitudeBins.empty()) {
    c.altitudeBins.assign(cfg_.altitude.bins(), 0);
    c.speedBins.assign(cfg_.speed.bins(), 0);
  }
  return c;
}

void FlightStats::add_point(int year, AircraftClass cls, std::optional<double> altAglFt, double speedKt) {
  auto& c = cell_mut(year, cls);
  if (!altAglFt) {
    ++c.aglMissing;
  } else if (*altAglFt < cfg_.bandLoFt) {
    ++c.belowBand;
  } else if (*altAglFt > cfg_.bandHiFt) {
    ++c.aboveBand;
  } else {
    ++c.inBand;
    ++c.altitudeBins[cfg_.altitude.bin_of(*altAglFt)];
    ++c.speedBins[cfg_.speed.bin_of(speedKt)];
  }
}

void FlightStats::add_rows(int year, AircraftClass cls, std::span<const ProcessedRow> rows) {
  for (const auto& r : rows) add_point(year, cls, r.altAGL, r.speed);
}

FlightStats& FlightStats::operator+=(const FlightStats& o) {
  for (const auto& [year, row] : o.cells_) {
    for (std::size_t k = 0; k < kClassCount; ++k) {
      const Cell& src = row[k];
      if (src.altitudeBins.empty()) continue;
      Cell& dst = cell_mut(year, static_cast<AircraftClass>(k));
      if (dst.altitudeBins.size() != src.altitudeBins.size() || dst.speedBins.size() != src.speedBins.size())
        throw Error(ErrorKind::Config, "cannot merge statistics with different binning");
      dst.inBand += src.inBand;
      dst.belowBand += src.belowBand;
      dst.aboveBand += src.aboveBand;
      dst.aglMissing += src.aglMissing;
      for (std::size_t i = 0; i < src.altitudeBins.size(); ++i) dst.altitudeBins[i] += src.altitudeBins[i];
      for (std::size_t i = 0; i < src.speedBins.size(); ++i) dst.speedBins[i] += src.speedBins[i];
    }
  }
  return *this;
}

std::vector<int> FlightStats::years() const {
  std::vector<int> y;
  for (const auto& [year, row] : cells_) y.push_back(year);
  return y;
}

const FlightStats::Cell* FlightStats::cell(int year, AircraftClass cls) const {
  auto it = cells_.find(year);
  if (it == cells_.end()) return nullptr;
  const Cell& c = it->second[static_cast<std::size_t>(cls)];
  return c.altitudeBins.empty() ? nullptr : &c;
}

namespace {

double to_hours(std::uint64_t points) { return static_cast<double>(points) / 3600.0; }

}  // namespace

std::vector<FlightHoursRow> FlightStats::flight_hours() const {
  std::vector<FlightHoursRow> out;
  for (const auto& [year, row] : cells_) {
    FlightHoursRow r;
    r.year = year;
    for (std::size_t k = 0; k < kClassCount; ++k) {
      r.hours[k] = to_hours(row[k].inBand);
      r.total += r.hours[k];
    }
    out.push_back(r);
  }
  return out;
}

std::vector<Histogram> FlightStats::histograms() const {
  std::vector<Histogram> out;
  for (const auto& [year, row] : cells_) {
    for (std::size_t k = 0; k < kClassCount; ++k) {
      const Cell& c = row[k];
      if (c.altitudeBins.empty()) continue;
      for (auto var : {HistVariable::AltitudeAgl, HistVariable::Speed}) {
        Histogram h;
        h.variable = var;
        h.year = year;
        h.aircraftClass = static_cast<AircraftClass>(k);
        const auto& spec = var == HistVariable::AltitudeAgl ? cfg_.altitude : cfg_.speed;
        const auto& bins = var == HistVariable::AltitudeAgl ? c.altitudeBins : c.speedBins;
        h.edges = spec.edges();
        for (auto n : bins) h.hours.push_back(to_hours(n));
        out.push_back(std::move(h));
      }
    }
  }
  return out;
}

std::vector<fs::path> find_processed_files(const fs::path& processedRoot) {
  std::vector<fs::path> out;
  if (!fs::is_directory(processedRoot)) return out;
  for (const auto& e : fs::recursive_directory_iterator(processedRoot)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    auto rel = fs::relative(e.path(), processedRoot);
    if (std::distance(rel.begin(), rel.end()) == 4) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FlightStats flight_hours(const fs::path& processedRoot, const BinningConfig& cfg) {
  auto files = find_processed_files(processedRoot);
  std::vector<FlightStats> partial(files.size(), FlightStats(cfg));
  std::vector<std::string> errors(files.size());
  const auto n = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      auto rel = fs::relative(files[i], processedRoot);
      auto it = rel.begin();
      auto year = text::parse_int(it->string());
      auto cls = parse_class((++it)->string());
      if (!year || !cls) throw Error(ErrorKind::Input, "cannot tell year/class of " + files[i].string());
      auto rows = parse_processed(text::read_file(files[i]));
      partial[i].add_rows(static_cast<int>(*year), *cls, rows);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error(ErrorKind::Input, e);
  FlightStats total(cfg);
  for (const auto& p : partial) total += p;
  return total;
}

bool PresenceIndex::add(const HourStamp& hour, Icao24 aircraft, AircraftClass cls) {
  auto label = hour.label();
  if (!seen_.emplace(std::pair{label, aircraft.value()}, cls).second) return false;
  ++hours_[hour.year][label][static_cast<std::size_t>(cls)];
  return true;
}

PresenceIndex& PresenceIndex::operator+=(const PresenceIndex& o) {
  for (const auto& [key, cls] : o.seen_) {
    if (!seen_.emplace(key, cls).second) continue;
    auto hour = HourStamp::parse_label(key.first);
    ++hours_[hour->year][key.first][static_cast<std::size_t>(cls)];
  }
  return *this;
}

std::vector<int> PresenceIndex::years() const {
  std::vector<int> y;
  for (const auto& [year, h] : hours_) y.push_back(year);
  return y;
}

std::size_t PresenceIndex::hours(int year) const {
  auto it = hours_.find(year);
  return it == hours_.end() ? 0 : it->second.size();
}

const std::map<std::string, std::array<std::uint32_t, kClassCount>>* PresenceIndex::year_hours(int year) const {
  auto it = hours_.find(year);
  return it == hours_.end() ? nullptr : &it->second;
}
PresenceIndex collect_presence(const std::optional<fs::path>& organizedRoot, const std::optional<fs::path>& archiveRoot) {
  PresenceIndex idx;
  auto class_at = [](const fs::path& rel) -> std::optional<AircraftClass> {
    auto it = rel.begin();
    if (it == rel.end() || ++it == rel.end()) return std::nullopt;
    return parse_class(it->string());
  };
  if (organizedRoot && fs::is_directory(*organizedRoot)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(*organizedRoot))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto name = parse_organized_file_name(f.filename().string());
      auto cls = class_at(fs::relative(f, *organizedRoot));
      if (name && cls) idx.add(name->hour, name->icao24, *cls);
    }
  }
  if (archiveRoot && fs::is_directory(*archiveRoot)) {
    for (const auto& a : find_archives(*archiveRoot)) {
      auto cls = class_at(fs::relative(a, *archiveRoot));
      if (!cls) continue;
      auto reader = zip::Reader::open(a);
      for (const auto& e : reader.entries()) {
        auto name = parse_organized_file_name(e.name);
        if (name) idx.add(name->hour, name->icao24, *cls);
      }
    }
  }
  return idx;
}

std::optional<DistributionMode> parse_distribution_mode(std::string_view s) {
  if (s == "presence") return DistributionMode::Presence;
  if (s == "aircraft-share") return DistributionMode::AircraftShare;
  return std::nullopt;
}

TypeDistributionRow type_distribution(const PresenceIndex& index, int year, DistributionMode mode) {
  TypeDistributionRow row;
  row.year = year;
  const auto* hours = index.year_hours(year);
  if (!hours || hours->empty()) return row;
  row.hours = hours->size();
  std::array<double, kClassCount> acc{};
  for (const auto& [label, counts] : *hours) {
    std::uint64_t sum = 0;
    for (auto c : counts) sum += c;
    for (std::size_t k = 0; k < kClassCount; ++k) {
      if (mode == DistributionMode::Presence) acc[k] += counts[k] > 0 ? 1.0 : 0.0;
      else if (sum > 0) acc[k] += static_cast<double>(counts[k]) / static_cast<double>(sum);
    }
  }
  for (std::size_t k = 0; k < kClassCount; ++k) row.fractions[k] = acc[k] / static_cast<double>(row.hours);
  return row;
}

namespace {

std::string class_header() {
  std::string h;
  for (auto c : kAllClasses) {
    h += ',';
    h += class_name(c);
  }
  return h;
}

}  // namespace

std::string format_flight_hours(std::span<const FlightHoursRow> rows) {
  std::string out = "year" + class_header() + ",total\n";
  for (const auto& r : rows) {
    out += std::to_string(r.year);
    for (double h : r.hours) out += ',' + text::fmt_fixed(h, 6);
    out += ',' + text::fmt_fixed(r.total, 6) + '\n';
  }
  return out;
}

std::string format_type_distribution(std::span<const TypeDistributionRow> rows) {
  std::string out = "year,hours" + class_header() + '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.year) + ',' + std::to_string(r.hours);
    for (double f : r.fractions) out += ',' + text::fmt_fixed(f, 6);
    out += '\n';
  }
  return out;
}

std::string format_histograms(std::span<const Histogram> hists, HistVariable variable) {
  std::string out = "year,class,bin_lo,bin_hi,hours\n";
  for (const auto& h : hists) {
    if (h.variable != variable) continue;
    for (std::size_t i = 0; i < h.hours.size(); ++i) {
      out += std::to_string(h.year) + ',';
      out += class_name(h.aircraftClass);
      out += ',' + text::fmt(h.edges[i]) + ',' + text::fmt(h.edges[i + 1]) + ',' + text::fmt_fixed(h.hours[i], 6);
      out += '\n';
    }
  }
  return out;
}

std::string format_excluded(const FlightStats& stats) {
  std::string out = "year,class,in_band_points,below_band_points,above_band_points,agl_missing_points\n";
  for (int y : stats.years()) {
    for (auto c : kAllClasses) {
      const auto* cell = stats.cell(y, c);
      if (!cell) continue;
      out += std::to_string(y) + ',';
      out += class_name(c);
      out += ',' + std::to_string(cell->inBand) + ',' + std::to_string(cell->belowBand) + ',' +
             std::to_string(cell->aboveBand) + ',' + std::to_string(cell->aglMissing) + '\n';
    }
  }
  return out;
}

std::string gnuplot_script(const FlightStats& stats) {
  std::string out =
      "# gnuplot plots.gp\n"
      "set datafile separator ','\n"
      "set terminal pngcairo size 900,600\n"
      "set style fill solid 0.6\n"
      "set ylabel 'flight hours'\n";
  for (auto [var, file, xlabel] : {std::tuple{"altitude", "hist_altitude.csv", "altitude AGL (ft)"},
                                  std::tuple{"speed", "hist_speed.csv", "speed (kt)"}}) {
    for (int y : stats.years()) {
      for (auto c : kAllClasses) {
        if (!stats.cell(y, c)) continue;
        std::string cls(class_name(c));
        out += "set output '" + std::string(var) + "_" + std::to_string(y) + "_" + cls + ".png'\n";
        out += "set xlabel '" + std::string(xlabel) + "'\n";
        out += "set title '" + cls + " " + std::to_string(y) + "'\n";
        out += "plot '" + std::string(file) + "' every ::1 using (($1==" + std::to_string(y) + " && strcol(2) eq '" +
               cls + "') ? ($3+$4)/2 : 1/0):5:($4-$3) with boxes notitle\n";
      }
    }
  }
  return out;
}

StatsOutputs write_stats(const fs::path& outDir, const FlightStats& stats, const PresenceIndex* presence,
                         DistributionMode mode, bool plots) {
  StatsOutputs res;
  fs::create_directories(outDir);
  auto put = [&](const char* name, const std::string& body) {
    text::write_file_atomic(outDir / name, body);
    res.files.push_back(outDir / name);
  };
  res.flightHours = stats.flight_hours();
  auto hists = stats.histograms();
  put("flight_hours.csv", format_flight_hours(res.flightHours));
  put("hist_altitude.csv", format_histograms(hists, HistVariable::AltitudeAgl));
  put("hist_speed.csv", format_histograms(hists, HistVariable::Speed));
  put("excluded_points.csv", format_excluded(stats));
  if (presence) {
    for (int y : presence->years()) res.distribution.push_back(type_distribution(*presence, y, mode));
    put("type_distribution.csv", format_type_distribution(res.distribution));
  }
  if (plots) put("plots.gp", gnuplot_script(stats));
  return res;
}

}  // namespace skytrack
