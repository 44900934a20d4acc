#include "skytrack/registry.hpp"

#include <algorithm>
#include <climits>
#include <cstdio>
#include <unordered_map>

#include "skytrack/error.hpp"
#include "skytrack/textio.hpp"

namespace skytrack {

namespace {

constexpr std::array<std::string_view, 13> kClassNames = {
    "FixedWingSingleEngine", "FixedWingMultiEngine", "Rotorcraft",       "Glider",     "Balloon",
    "Airship",               "Gyroplane",            "WeightShiftControl", "PoweredParachute",
    "HybridLift",            "UnmannedOrOther",      "NonPoweredOther",  "Unknown",
};

constexpr std::array<std::string_view, 4> kCountryCodes = {"US", "CA", "NL", "IE"};

std::optional<CalendarDate> parse_date(std::string_view s, std::string_view format) {
  s = text::trim(s);
  if (s.empty()) return std::nullopt;
  std::string iso;
  if (format == "YYYYMMDD") {
    if (s.size() != 8) return std::nullopt;
    iso = std::string(s.substr(0, 4)) + "-" + std::string(s.substr(4, 2)) + "-" + std::string(s.substr(6, 2));
  } else if (format == "DD/MM/YYYY") {
    if (s.size() != 10 || s[2] != '/' || s[5] != '/') return std::nullopt;
    iso = std::string(s.substr(6, 4)) + "-" + std::string(s.substr(3, 2)) + "-" + std::string(s.substr(0, 2));
  } else {
    iso = std::string(s);
  }
  return CalendarDate::parse(iso);
}

int column_index(const std::vector<std::string>& header, std::string_view name) {
  if (name.empty()) return -1;
  auto want = text::lower(text::trim(name));
  for (std::size_t i = 0; i < header.size(); ++i)
    if (text::lower(text::trim(header[i])) == want) return static_cast<int>(i);
  return -1;
}

}  // namespace

std::string_view class_name(AircraftClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

std::optional<AircraftClass> parse_class(std::string_view name) {
  name = text::trim(name);
  for (std::size_t i = 0; i < kClassNames.size(); ++i)
    if (kClassNames[i] == name) return static_cast<AircraftClass>(i);
  return std::nullopt;
}

std::string_view country_code(Country c) { return kCountryCodes[static_cast<std::size_t>(c)]; }

std::optional<Country> parse_country(std::string_view code) {
  auto up = text::trim(code);
  for (std::size_t i = 0; i < kCountryCodes.size(); ++i)
    if (kCountryCodes[i] == up) return static_cast<Country>(i);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Schemas and class maps

RegistrySchema RegistrySchema::defaults(Country c) {
  RegistrySchema s;
  switch (c) {
    case Country::US:
      s = {',', "MODE S CODE HEX", "TYPE AIRCRAFT", "NO-SEATS", "EXPIRATION DATE", "YYYYMMDD"};
      break;
    case Country::CA:
      s = {',', "ICAO_HEX", "AIRCRAFT_CATEGORY", "NUMBER_OF_SEATS", "EXPIRY_DATE", "YYYY-MM-DD"};
      break;
    case Country::NL:
      s = {';', "icao_hex", "categorie", "", "vervaldatum", "DD/MM/YYYY"};
      break;
    case Country::IE:
      s = {',', "ICAO 24 Bit Hex", "Aircraft Type", "Seats", "Expiry", "DD/MM/YYYY"};
      break;
  }
  return s;
}

RegistrySchema RegistrySchema::parse(std::string_view body, RegistrySchema base) {
  text::LineReader lines(body);
  std::string_view line;
  while (lines.next(line)) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::Config, "schema line without '=': " + std::string(line));
    auto key = text::trim(line.substr(0, eq));
    auto value = std::string(text::trim(line.substr(eq + 1)));
    if (key == "delimiter") {
      if (value == "\\t" || value == "tab") base.delimiter = '\t';
      else if (value.size() == 1) base.delimiter = value[0];
      else throw Error(ErrorKind::Config, "delimiter must be one character");
    } else if (key == "address_column") base.addressColumn = value;
    else if (key == "type_column") base.typeColumn = value;
    else if (key == "seats_column") base.seatsColumn = value;
    else if (key == "expiry_column") base.expiryColumn = value;
    else if (key == "expiry_format") base.expiryFormat = value;
    else throw Error(ErrorKind::Config, "unknown schema key: " + std::string(key));
  }
  return base;
}

ClassMap ClassMap::defaults() {
  ClassMap m;
  // FAA aircraft type codes
  m.set("1", AircraftClass::Glider);
  m.set("2", AircraftClass::Balloon);
  m.set("3", AircraftClass::Airship);
  m.set("4", AircraftClass::FixedWingSingleEngine);
  m.set("5", AircraftClass::FixedWingMultiEngine);
  m.set("6", AircraftClass::Rotorcraft);
  m.set("7", AircraftClass::WeightShiftControl);
  m.set("8", AircraftClass::PoweredParachute);
  m.set("9", AircraftClass::Gyroplane);
  m.set("H", AircraftClass::HybridLift);
  m.set("O", AircraftClass::UnmannedOrOther);
  // descriptive strings seen across the other registries
  m.set("Glider", AircraftClass::Glider);
  m.set("Sailplane", AircraftClass::Glider);
  m.set("Balloon", AircraftClass::Balloon);
  m.set("Blimp/Dirigible", AircraftClass::Airship);
  m.set("Airship", AircraftClass::Airship);
  m.set("Fixed wing single engine", AircraftClass::FixedWingSingleEngine);
  m.set("Fixed wing single-engine", AircraftClass::FixedWingSingleEngine);
  m.set("Aeroplane - single engine", AircraftClass::FixedWingSingleEngine);
  m.set("Fixed wing multi engine", AircraftClass::FixedWingMultiEngine);
  m.set("Fixed wing multi-engine", AircraftClass::FixedWingMultiEngine);
  m.set("Aeroplane - multi engine", AircraftClass::FixedWingMultiEngine);
  m.set("Rotorcraft", AircraftClass::Rotorcraft);
  m.set("Helicopter", AircraftClass::Rotorcraft);
  m.set("Weight-shift-control", AircraftClass::WeightShiftControl);
  m.set("Powered parachute", AircraftClass::PoweredParachute);
  m.set("Gyroplane", AircraftClass::Gyroplane);
  m.set("Gyrocopter", AircraftClass::Gyroplane);
  m.set("Hybrid lift", AircraftClass::HybridLift);
  m.set("Unmanned", AircraftClass::UnmannedOrOther);
  m.set("Other", AircraftClass::UnmannedOrOther);
  m.set("Hang glider", AircraftClass::NonPoweredOther);
  m.set("Kite", AircraftClass::NonPoweredOther);
  m.set("Non-powered", AircraftClass::NonPoweredOther);
  for (auto c : kAllClasses)
    if (c != AircraftClass::Unknown) m.set(class_name(c), c);
  return m;
}

ClassMap ClassMap::parse(std::string_view body, ClassMap base) {
  text::LineReader lines(body);
  std::string_view line;
  while (lines.next(line)) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.rfind('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::Config, "class map line without '=': " + std::string(line));
    auto cls = parse_class(line.substr(eq + 1));
    if (!cls || *cls == AircraftClass::Unknown)
      throw Error(ErrorKind::Config, "unknown aircraft class: " + std::string(text::trim(line.substr(eq + 1))));
    base.set(line.substr(0, eq), *cls);
  }
  return base;
}

void ClassMap::set(std::string_view typeString, AircraftClass c) { map_[text::lower(text::trim(typeString))] = c; }

AircraftClass ClassMap::lookup(std::string_view typeString) const {
  auto it = map_.find(text::lower(text::trim(typeString)));
  return it == map_.end() ? AircraftClass::UnmannedOrOther : it->second;
}

// ---------------------------------------------------------------------------
// Parsing

RegistryParseResult parse_registry(std::string_view bytes, Country country, int year, const RegistrySchema& schema,
                                   const ClassMap& classes) {
  RegistryParseResult out;
  text::LineReader lines(bytes);
  std::string_view line;
  // skip blank lines before the header
  do {
    if (!lines.next(line)) return out;
  } while (text::trim(line).empty());

  auto header = text::split_record(line, schema.delimiter);
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  int addrCol = column_index(header, schema.addressColumn);
  int typeCol = column_index(header, schema.typeColumn);
  int seatCol = column_index(header, schema.seatsColumn);
  int expCol = column_index(header, schema.expiryColumn);
  if (addrCol < 0 || typeCol < 0)
    throw Error(ErrorKind::Input, "registry header for " + std::string(country_code(country)) +
                                      " lacks address or type column");

  auto field = [](const std::vector<std::string>& row, int col) -> std::string_view {
    return col >= 0 && static_cast<std::size_t>(col) < row.size() ? std::string_view(row[col]) : std::string_view();
  };

  while (lines.next(line)) {
    if (text::trim(line).empty()) continue;
    auto row = text::split_record(line, schema.delimiter);
    auto addr = Icao24::parse(field(row, addrCol));
    if (!addr) {
      ++out.skipped;
      continue;
    }
    RegistryEntry e;
    e.icao24 = *addr;
    e.aircraftClass = classes.lookup(field(row, typeCol));
    if (auto seats = text::parse_int(field(row, seatCol)); seats && *seats >= 1 && *seats < 100000)
      e.seats = static_cast<int>(*seats);
    e.expiry = parse_date(field(row, expCol), schema.expiryFormat);
    e.registryYear = year;
    e.sourceCountry = country;
    e.expired = e.expiry && e.expiry->year < year;
    out.entries.push_back(e);
  }
  return out;
}

RegistryParseResult parse_registry(std::string_view bytes, std::string_view formatTag, int year) {
  auto country = parse_country(formatTag);
  if (!country) throw Error(ErrorKind::Config, "unknown registry format: " + std::string(formatTag));
  return parse_registry(bytes, *country, year, RegistrySchema::defaults(*country), ClassMap::defaults());
}

// ---------------------------------------------------------------------------
// Seat bins

std::string SeatBin::label() const {
  if (unknown) return "Seats_Unknown";
  char buf[32];
  if (hi == INT_MAX) std::snprintf(buf, sizeof buf, "Seats_%03d_plus", lo);
  else std::snprintf(buf, sizeof buf, "Seats_%03d_%03d", lo, hi);
  return buf;
}

SeatBin seat_bin_for(std::optional<int> seats) {
  if (!seats || *seats < 1) return SeatBin{};
  if (*seats > 200) return SeatBin{201, INT_MAX, false};
  int lo = ((*seats - 1) / 10) * 10 + 1;
  return SeatBin{lo, lo + 9, false};
}

std::vector<SeatBin> all_seat_bins() {
  std::vector<SeatBin> bins{SeatBin{}};
  for (int lo = 1; lo <= 191; lo += 10) bins.push_back({lo, lo + 9, false});
  bins.push_back({201, INT_MAX, false});
  return bins;
}

// ---------------------------------------------------------------------------
// Lookup

RegistryLookup RegistryLookup::build(std::span<const RegistryEntry> entries, int year) {
  std::unordered_map<Icao24, Registration> best;
  best.reserve(entries.size());
  auto better = [](const Registration& cand, const Registration& cur) {
    // latest expiry wins; missing expiry ranks oldest; ties go to precedence order
    if (cand.expiry != cur.expiry) return cand.expiry > cur.expiry;
    return cand.sourceCountry < cur.sourceCountry;
  };
  for (const auto& e : entries) {
    if (e.registryYear != year) continue;
    Registration r{e.aircraftClass, e.seats, e.expiry, e.sourceCountry, e.expired};
    auto [it, inserted] = best.try_emplace(e.icao24, r);
    if (!inserted && better(r, it->second)) it->second = r;
  }
  RegistryLookup out;
  out.year_ = year;
  out.table_.assign(best.begin(), best.end());
  std::sort(out.table_.begin(), out.table_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

const Registration* RegistryLookup::find(Icao24 a) const {
  auto it = std::lower_bound(table_.begin(), table_.end(), a, [](const auto& e, Icao24 v) { return e.first < v; });
  return it != table_.end() && it->first == a ? &it->second : nullptr;
}

RegistryLookup load_registry_year(const std::filesystem::path& root, int year, RegistryLoadReport* report) {
  namespace fs = std::filesystem;
  auto dir = root / std::to_string(year);
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Input, "no registry directory " + dir.string());
  ClassMap classes = ClassMap::defaults();
  if (fs::exists(dir / "classmap.cfg")) classes = ClassMap::parse(text::read_file(dir / "classmap.cfg"), classes);

  std::vector<RegistryEntry> all;
  RegistryLoadReport local;
  for (auto c : {Country::US, Country::CA, Country::NL, Country::IE}) {
    auto file = dir / (std::string(country_code(c)) + ".csv");
    if (!fs::exists(file)) continue;
    auto schema = RegistrySchema::defaults(c);
    auto schemaFile = dir / (std::string(country_code(c)) + ".schema");
    if (fs::exists(schemaFile)) schema = RegistrySchema::parse(text::read_file(schemaFile), schema);
    auto parsed = parse_registry(text::read_file(file), c, year, schema, classes);
    local.entries += parsed.entries.size();
    local.skipped += parsed.skipped;
    local.files.push_back(file.string());
    all.insert(all.end(), parsed.entries.begin(), parsed.entries.end());
  }
  if (report) *report = local;
  return RegistryLookup::build(all, year);
}

Classification classify(Icao24 a, int /*year*/, const RegistryLookup& lookup) {
  const Registration* r = lookup.find(a);
  if (!r) return {};
  return {r->aircraftClass, seat_bin_for(r->seats)};
}

// ---------------------------------------------------------------------------
// Hierarchy

std::string IcaoRange::label() const { return format_hex24(lo) + "_" + format_hex24(hi); }

std::optional<IcaoRange> IcaoRange::parse_label(std::string_view label) {
  if (label.size() != 13 || label[6] != '_') return std::nullopt;
  auto parse = [](std::string_view s) -> std::optional<std::uint32_t> {
    std::uint32_t v = 0;
    for (char c : s) {
      int d = (c >= '0' && c <= '9') ? c - '0' : (c >= 'A' && c <= 'F') ? c - 'A' + 10 : (c >= 'a' && c <= 'f') ? c - 'a' + 10 : -1;
      if (d < 0) return std::nullopt;
      v = v * 16 + static_cast<std::uint32_t>(d);
    }
    return v;
  };
  auto lo = parse(label.substr(0, 6)), hi = parse(label.substr(7, 6));
  if (!lo || !hi || *lo >= *hi) return std::nullopt;
  return IcaoRange{*lo, *hi};
}

std::vector<IcaoRange> partition_icao_ranges(std::span<const Icao24> sorted, std::size_t maxPerDir) {
  std::vector<IcaoRange> out;
  if (sorted.empty() || maxPerDir == 0) return out;
  for (std::size_t start = 0; start < sorted.size(); start += maxPerDir) {
    std::size_t next = start + maxPerDir;
    std::uint32_t hi = next < sorted.size() ? sorted[next].value() : sorted.back().value() + 1;
    out.push_back({sorted[start].value(), hi});
  }
  return out;
}

const IcaoRange* find_range(std::span<const IcaoRange> ranges, Icao24 a) {
  auto it = std::upper_bound(ranges.begin(), ranges.end(), a.value(),
                             [](std::uint32_t v, const IcaoRange& r) { return v < r.lo; });
  if (it == ranges.begin()) return nullptr;
  --it;
  return it->contains(a) ? &*it : nullptr;
}

std::string HierarchyPath::str() const {
  return std::to_string(year) + "/" + std::string(class_name(aircraftClass)) + "/" + seatDir + "/" + range.label();
}

std::filesystem::path HierarchyPath::relative() const {
  return std::filesystem::path(std::to_string(year)) / std::string(class_name(aircraftClass)) / seatDir / range.label();
}

HierarchyPath derive_path(const Classification& c, int year, std::optional<HourStamp> hour, const IcaoRange& range) {
  HierarchyPath p;
  p.year = year;
  p.aircraftClass = c.aircraftClass;
  p.range = range;
  if (c.known()) {
    p.seatDir = c.seats.label();
  } else {
    if (!hour) throw std::invalid_argument("Unknown-branch path needs an hour stamp");
    p.seatDir = hour->label();
  }
  return p;
}

std::string organized_file_name(const HourStamp& hour, Icao24 a) { return hour.label() + "_" + a.str() + ".csv"; }

std::optional<OrganizedName> parse_organized_file_name(std::string_view name) {
  // YYYY-MM-DD_HH_XXXXXX.csv
  if (name.size() != 24 || !name.ends_with(".csv") || name[13] != '_') return std::nullopt;
  auto hour = HourStamp::parse_label(name.substr(0, 13));
  auto icao = Icao24::parse(name.substr(14, 6));
  if (!hour || !icao) return std::nullopt;
  return OrganizedName{*hour, *icao};
}

Hierarchy::Hierarchy(const RegistryLookup& lookup) : year_(lookup.year()) {
  std::map<std::pair<AircraftClass, SeatBin>, std::vector<Icao24>> members;
  for (const auto& [addr, reg] : lookup.entries())
    members[{reg.aircraftClass, seat_bin_for(reg.seats)}].push_back(addr);  // already ascending
  for (auto& [key, addrs] : members) {
    // keep the range tier within the fan-out bound even for huge bins
    std::size_t per = std::max(kMaxDirFanout, (addrs.size() + kMaxDirFanout - 1) / kMaxDirFanout);
    ranges_[key] = partition_icao_ranges(addrs, per);
  }
}

const IcaoRange* Hierarchy::range_for(const Classification& c, Icao24 a) const {
  auto it = ranges_.find({c.aircraftClass, c.seats});
  if (it == ranges_.end()) return nullptr;
  return find_range(it->second, a);
}

std::vector<std::string> Hierarchy::directories() const {
  std::vector<std::string> out;
  std::string y = std::to_string(year_);
  out.push_back(y);
  AircraftClass lastClass = AircraftClass::Unknown;
  bool first = true;
  for (const auto& [key, ranges] : ranges_) {
    auto classDir = y + "/" + std::string(class_name(key.first));
    if (first || key.first != lastClass) out.push_back(classDir);
    first = false;
    lastClass = key.first;
    auto seatDir = classDir + "/" + key.second.label();
    out.push_back(seatDir);
    for (const auto& r : ranges) out.push_back(seatDir + "/" + r.label());
  }
  return out;
}

}  // namespace skytrack
