#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skytrack/geo.hpp"
#include "skytrack/icao.hpp"
#include "skytrack/registry.hpp"
#include "skytrack/timeutil.hpp"

namespace skytrack {

/// One surveillance observation. Raw records carry metric units (m, m/s);
/// after convert_units speeds are knots, altitudes feet, vertical rate ft/min.
struct StateVector {
  std::int64_t time = 0;
  Icao24 icao24;
  std::optional<double> lat;
  std::optional<double> lon;
  std::optional<double> groundSpeed;
  std::optional<double> track;
  std::optional<double> verticalRate;
  std::optional<double> baroAlt;
  std::optional<double> geoAlt;
  bool onGround = false;
  std::optional<std::int64_t> lastPositionUpdate;
};

/// Column names of the hourly raw files; extra columns are ignored.
struct HourSchema {
  char delimiter = ',';
  std::string time = "time";
  std::string icao24 = "icao24";
  std::string lat = "lat";
  std::string lon = "lon";
  std::string velocity = "velocity";
  std::string heading = "heading";
  std::string vertrate = "vertrate";
  std::string baroaltitude = "baroaltitude";
  std::string geoaltitude = "geoaltitude";
  std::string onground = "onground";
  std::string lastposupdate = "lastposupdate";  // optional column
};

struct HourParse {
  std::vector<StateVector> records;
  std::size_t malformed = 0;
};

/// Rows without a valid time or address, or with unparseable numbers, are
/// counted as malformed. Empty numeric fields become absent values.
/// Throws Error(Input) when a required column is missing from the header.
HourParse parse_hour_file(std::string_view bytes, const HourSchema& schema = {});

struct FilterResult {
  std::vector<StateVector> kept;
  std::size_t dropped = 0;
};

/// Drops records with missing or out-of-range position, or with neither
/// altitude. Order of survivors is preserved.
FilterResult quality_filter(std::vector<StateVector> records);

/// Collapses rows sharing (icao24, time) to the one with the latest
/// lastPositionUpdate. Output is sorted by (icao24, time).
FilterResult collapse_duplicates(std::vector<StateVector> records);

StateVector convert_units(const StateVector& metric);

/// Keeps records whose position is inside `polygon` (boundary included).
FilterResult geo_filter(std::vector<StateVector> records, const GeoPolygon& polygon);

struct HourFileStats {
  std::size_t rawCount = 0;
  std::size_t malformedRows = 0;  // never became records, so outside rawCount
  std::size_t qualityDropped = 0;
  std::size_t geoDropped = 0;
  std::size_t organizedCount = 0;
  std::size_t filesWritten = 0;
  HourStamp hour;
  double elapsedSeconds = 0;

  bool balanced() const { return rawCount == qualityDropped + geoDropped + organizedCount; }
};

/// Column order of organized per-aircraft hourly files.
inline constexpr std::string_view kOrganizedHeader =
    "time,lat,lon,altBaro_ft,altGeo_ft,speed_kt,track_deg,vertRate_ftmin,onGround";

std::string format_organized(std::span<const StateVector> records);
/// Reads a file written by format_organized; the address comes from the caller.
std::vector<StateVector> parse_organized(std::string_view bytes, Icao24 icao24);

/// Writes one file per aircraft for one hour of filtered, converted records.
/// Unknown-branch range directories are partitioned from the addresses seen
/// in this hour. On an I/O failure every file created by this call is removed
/// and Error(Io) is thrown. Fills organizedCount and filesWritten.
HourFileStats write_organized(std::span<const StateVector> records, const RegistryLookup& lookup,
                              const Hierarchy& hierarchy, const HourStamp& hour, const std::filesystem::path& root);

/// Whole organize step for one hourly file.
HourFileStats organize_hour_file(const std::filesystem::path& file, const RegistryLookup& lookup,
                                 const Hierarchy& hierarchy, const GeoPolygon& polygon,
                                 const std::filesystem::path& root, const HourSchema& schema = {});

}  // namespace skytrack
