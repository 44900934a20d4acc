#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skytrack/icao.hpp"
#include "skytrack/timeutil.hpp"

namespace skytrack {

enum class AircraftClass : std::uint8_t {
  FixedWingSingleEngine,
  FixedWingMultiEngine,
  Rotorcraft,
  Glider,
  Balloon,
  Airship,
  Gyroplane,
  WeightShiftControl,
  PoweredParachute,
  HybridLift,
  UnmannedOrOther,
  NonPoweredOther,
  Unknown,
};

inline constexpr std::size_t kKnownClassCount = 12;

inline constexpr std::array<AircraftClass, 13> kAllClasses = {
    AircraftClass::FixedWingSingleEngine, AircraftClass::FixedWingMultiEngine, AircraftClass::Rotorcraft,
    AircraftClass::Glider,                AircraftClass::Balloon,              AircraftClass::Airship,
    AircraftClass::Gyroplane,             AircraftClass::WeightShiftControl,   AircraftClass::PoweredParachute,
    AircraftClass::HybridLift,            AircraftClass::UnmannedOrOther,      AircraftClass::NonPoweredOther,
    AircraftClass::Unknown,
};

std::string_view class_name(AircraftClass c);
std::optional<AircraftClass> parse_class(std::string_view name);

/// Registry sources; declaration order is the duplicate-resolution precedence.
enum class Country : std::uint8_t { US, CA, NL, IE };

std::string_view country_code(Country c);
std::optional<Country> parse_country(std::string_view code);

struct RegistryEntry {
  Icao24 icao24;
  AircraftClass aircraftClass = AircraftClass::Unknown;
  std::optional<int> seats;
  std::optional<CalendarDate> expiry;
  int registryYear = 0;
  Country sourceCountry = Country::US;
  // registration lapsed before the data year; still used for classification
  bool expired = false;
};

/// Column mapping for one country's registry export.
struct RegistrySchema {
  char delimiter = ',';
  std::string addressColumn;
  std::string typeColumn;
  std::string seatsColumn;   // empty: registry carries no seat counts
  std::string expiryColumn;  // empty: no expiry
  std::string expiryFormat = "YYYY-MM-DD";  // or YYYYMMDD, DD/MM/YYYY

  static RegistrySchema defaults(Country c);
  /// key=value text; keys not given keep the values from `base`.
  static RegistrySchema parse(std::string_view text, RegistrySchema base);
};

/// Registry type string -> class. Keys compare case-insensitively after trimming.
class ClassMap {
 public:
  static ClassMap defaults();
  /// "type string = ClassName" lines; '#' starts a comment. Later lines override.
  static ClassMap parse(std::string_view text, ClassMap base);

  void set(std::string_view typeString, AircraftClass c);
  /// Unmapped strings fall into UnmannedOrOther so every entry has a class.
  AircraftClass lookup(std::string_view typeString) const;

 private:
  std::map<std::string, AircraftClass, std::less<>> map_;
};

struct RegistryParseResult {
  std::vector<RegistryEntry> entries;
  std::size_t skipped = 0;
};

RegistryParseResult parse_registry(std::string_view bytes, Country country, int year,
                                   const RegistrySchema& schema, const ClassMap& classes);
/// Format tag form: "US", "CA", "NL", "IE". Unknown tag throws Error(Config).
RegistryParseResult parse_registry(std::string_view bytes, std::string_view formatTag, int year);

/// Seat-count directory. Bins are 10 wide up to 200, then one open bin.
struct SeatBin {
  int lo = 0;
  int hi = 0;  // inclusive; INT_MAX for the open bin
  bool unknown = true;

  std::string label() const;
  auto operator<=>(const SeatBin&) const = default;
};

SeatBin seat_bin_for(std::optional<int> seats);
/// Unknown bin first, then ascending.
std::vector<SeatBin> all_seat_bins();

struct Registration {
  AircraftClass aircraftClass = AircraftClass::Unknown;
  std::optional<int> seats;
  std::optional<CalendarDate> expiry;
  Country sourceCountry = Country::US;
  bool expired = false;
};

/// Immutable per-year address table; safe for concurrent readers.
class RegistryLookup {
 public:
  RegistryLookup() = default;
  static RegistryLookup build(std::span<const RegistryEntry> entries, int year);

  int year() const { return year_; }
  std::size_t size() const { return table_.size(); }
  const Registration* find(Icao24 a) const;
  std::span<const std::pair<Icao24, Registration>> entries() const { return table_; }

 private:
  int year_ = 0;
  std::vector<std::pair<Icao24, Registration>> table_;  // sorted by address
};

/// Loads <root>/<year>/{US,CA,NL,IE}.csv. Optional per-country "<CC>.schema"
/// and a shared "classmap.cfg" in the same directory override the defaults.
struct RegistryLoadReport {
  std::size_t entries = 0;
  std::size_t skipped = 0;
  std::vector<std::string> files;
};
RegistryLookup load_registry_year(const std::filesystem::path& root, int year, RegistryLoadReport* report = nullptr);

struct Classification {
  AircraftClass aircraftClass = AircraftClass::Unknown;
  SeatBin seats;

  bool known() const { return aircraftClass != AircraftClass::Unknown; }
};

/// Never fails: absent addresses land in the Unknown branch.
Classification classify(Icao24 a, int year, const RegistryLookup& lookup);

/// Half-open address interval [lo, hi) naming a bottom-tier directory.
struct IcaoRange {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;

  std::string label() const;  // "LOHEX_HIHEX"
  static std::optional<IcaoRange> parse_label(std::string_view label);
  bool contains(Icao24 a) const { return a.value() >= lo && a.value() < hi; }
  auto operator<=>(const IcaoRange&) const = default;
};

inline constexpr std::size_t kMaxDirFanout = 1000;

/// Chunks a strictly ascending address list into at most `maxPerDir` members
/// per range. Consecutive ranges abut: each range ends where the next one
/// starts, and the last ends one past its final member.
std::vector<IcaoRange> partition_icao_ranges(std::span<const Icao24> sortedAddresses,
                                             std::size_t maxPerDir = kMaxDirFanout);

/// Range containing `a` among abutting ascending ranges, or nullptr.
const IcaoRange* find_range(std::span<const IcaoRange> ranges, Icao24 a);

struct HierarchyPath {
  int year = 0;
  AircraftClass aircraftClass = AircraftClass::Unknown;
  std::string seatDir;  // seat bin label, or the hour label on the Unknown branch
  IcaoRange range;

  /// "2020/Rotorcraft/Seats_001_010/A00C12_A00D20"
  std::string str() const;
  std::filesystem::path relative() const;
};

/// The Unknown branch requires `hour`; known aircraft ignore it.
HierarchyPath derive_path(const Classification& c, int year, std::optional<HourStamp> hour, const IcaoRange& range);

/// "YYYY-MM-DD_HH_ICAO24.csv"
std::string organized_file_name(const HourStamp& hour, Icao24 a);
struct OrganizedName {
  HourStamp hour;
  Icao24 icao24;
};
std::optional<OrganizedName> parse_organized_file_name(std::string_view name);

/// Known-aircraft tiers of one year's tree: ranges per (class, seat bin).
class Hierarchy {
 public:
  explicit Hierarchy(const RegistryLookup& lookup);

  int year() const { return year_; }
  const IcaoRange* range_for(const Classification& c, Icao24 a) const;

  /// Every directory of the known branch, relative to the tree root, parents first.
  std::vector<std::string> directories() const;

  const std::map<std::pair<AircraftClass, SeatBin>, std::vector<IcaoRange>>& ranges() const { return ranges_; }

 private:
  int year_;
  std::map<std::pair<AircraftClass, SeatBin>, std::vector<IcaoRange>> ranges_;
};

}  // namespace skytrack
