#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skytrack/icao.hpp"
#include "skytrack/registry.hpp"
#include "skytrack/timeutil.hpp"
#include "skytrack/tracks.hpp"

namespace skytrack {

inline constexpr std::size_t kClassCount = 13;

/// Fixed-width bins over [lo, hi]; the last bin may be narrower. Values
/// outside the range land in the terminal bins.
struct BinSpec {
  double lo = 0;
  double hi = 1;
  double width = 1;

  std::vector<double> edges() const;
  std::size_t bins() const;
  std::size_t bin_of(double v) const;
};

struct BinningConfig {
  BinSpec altitude{50, 5000, 250};
  BinSpec speed{0, 600, 10};
  double bandLoFt = 50;  // inclusive
  double bandHiFt = 5000;  // inclusive

  /// key=value lines: altitude_lo, altitude_hi, altitude_width, speed_lo,
  /// speed_hi, speed_width, band_lo, band_hi.
  static BinningConfig parse(std::string_view text);
  void validate() const;
};

struct FlightHoursRow {
  int year = 0;
  std::array<double, kClassCount> hours{};
  double total = 0;
};

enum class HistVariable : std::uint8_t { AltitudeAgl, Speed };
std::string_view to_string(HistVariable v);

struct Histogram {
  HistVariable variable = HistVariable::AltitudeAgl;
  int year = 0;
  AircraftClass aircraftClass = AircraftClass::Unknown;
  std::vector<double> edges;
  std::vector<double> hours;  // one per bin

  double total() const;
};

/// Point tallies per (year, class). Everything is integer so merging is exact
/// and order-independent; hours are derived at 1/3600 h per point.
class FlightStats {
 public:
  struct Cell {
    std::uint64_t inBand = 0;
    std::uint64_t belowBand = 0;
    std::uint64_t aboveBand = 0;
    std::uint64_t aglMissing = 0;
    std::vector<std::uint64_t> altitudeBins;
    std::vector<std::uint64_t> speedBins;
  };

  explicit FlightStats(BinningConfig cfg = {});

  void add_point(int year, AircraftClass cls, std::optional<double> altAglFt, double speedKt);
  void add_rows(int year, AircraftClass cls, std::span<const ProcessedRow> rows);
  FlightStats& operator+=(const FlightStats& o);

  const BinningConfig& binning() const { return cfg_; }
  std::vector<int> years() const;
  const Cell* cell(int year, AircraftClass cls) const;

  std::vector<FlightHoursRow> flight_hours() const;
  std::vector<Histogram> histograms() const;

 private:
  Cell& cell_mut(int year, AircraftClass cls);

  BinningConfig cfg_;
  std::map<int, std::array<Cell, kClassCount>> cells_;
};

/// Processed files at <root>/<year>/<class>/<dir>/<name>.csv, sorted.
std::vector<std::filesystem::path> find_processed_files(const std::filesystem::path& processedRoot);

/// Reads every processed file under the root; files are folded in parallel.
FlightStats flight_hours(const std::filesystem::path& processedRoot, const BinningConfig& cfg = {});

/// Which aircraft were seen in which hour, by class.
class PresenceIndex {
 public:
  /// Returns false when this (hour, aircraft) pair was already recorded.
  bool add(const HourStamp& hour, Icao24 aircraft, AircraftClass cls);
  PresenceIndex& operator+=(const PresenceIndex& o);

  std::vector<int> years() const;
  std::size_t hours(int year) const;
  /// Distinct aircraft per class for each hour label of the year.
  const std::map<std::string, std::array<std::uint32_t, kClassCount>>* year_hours(int year) const;

 private:
  std::map<int, std::map<std::string, std::array<std::uint32_t, kClassCount>>> hours_;
  std::map<std::pair<std::string, std::uint32_t>, AircraftClass> seen_;
};

/// Scans organized file names and leaf-archive member names.
PresenceIndex collect_presence(const std::optional<std::filesystem::path>& organizedRoot,
                               const std::optional<std::filesystem::path>& archiveRoot);

enum class DistributionMode : std::uint8_t {
  Presence,       // share of hours with at least one aircraft of the class
  AircraftShare,  // mean over hours of the class's share of distinct aircraft
};
std::optional<DistributionMode> parse_distribution_mode(std::string_view s);

struct TypeDistributionRow {
  int year = 0;
  std::size_t hours = 0;
  std::array<double, kClassCount> fractions{};
};

TypeDistributionRow type_distribution(const PresenceIndex& index, int year,
                                      DistributionMode mode = DistributionMode::Presence);

// Delimited-text tables. Numbers use fixed decimals so reruns are byte-identical.
std::string format_flight_hours(std::span<const FlightHoursRow> rows);
std::string format_type_distribution(std::span<const TypeDistributionRow> rows);
std::string format_histograms(std::span<const Histogram> hists, HistVariable variable);
std::string format_excluded(const FlightStats& stats);
/// gnuplot script plotting the histogram tables written next to it.
std::string gnuplot_script(const FlightStats& stats);

struct StatsOutputs {
  std::vector<std::filesystem::path> files;
  std::vector<FlightHoursRow> flightHours;
  std::vector<TypeDistributionRow> distribution;
};

StatsOutputs write_stats(const std::filesystem::path& outDir, const FlightStats& stats, const PresenceIndex* presence,
                         DistributionMode mode, bool plots);

}  // namespace skytrack
