#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skytrack/geo.hpp"
#include "skytrack/icao.hpp"
#include "skytrack/ingest.hpp"
#include "skytrack/registry.hpp"
#include "skytrack/terrain.hpp"

namespace skytrack {

enum class Airspace : std::uint8_t { B, C, D, Other };
std::string_view to_string(Airspace a);
std::optional<Airspace> parse_airspace(std::string_view s);

enum class AglStatus : std::uint8_t { Ok, BelowGround, Missing };

struct TrackPoint {
  double time = 0;  // unix seconds
  double lat = 0;
  double lon = 0;
  double altMSL = 0;  // ft
  double altAGL = 0;  // ft; meaningful unless agl == Missing
  double speed = 0;   // kt
  double course = 0;  // deg [0, 360)
  double vertRate = 0;  // ft/min
  double accel = 0;     // kt/s
  Airspace airspace = Airspace::Other;
  AglStatus agl = AglStatus::Missing;
  DemSource terrainSource = DemSource::OCEAN;
};

struct TrackSegment {
  Icao24 icao24;
  AircraftClass aircraftClass = AircraftClass::Unknown;
  std::vector<TrackPoint> points;
};

struct OutlierParams {
  double madThreshold = 1.5;
  double madZeroFloorFt = 25.0;  // zero-MAD series: deviations at or below this are kept
  double smoothWindow = 30.0;    // s
  double smoothSigma = 0.0;      // s; 0 means window / 5
  bool smoothAltitude = true;
  bool smoothSpeed = true;
  double maxGap = 60.0;  // s
  std::size_t minPoints = 10;
  std::array<double, 13> speedCeiling = defaultCeilings();

  double sigma() const { return smoothSigma > 0 ? smoothSigma : smoothWindow / 5.0; }
  double ceiling(AircraftClass c) const { return speedCeiling[static_cast<std::size_t>(c)]; }
  void set_ceiling(AircraftClass c, double kt) { speedCeiling[static_cast<std::size_t>(c)] = kt; }
  /// Throws Error(Config) when a parameter is not positive.
  void validate() const;

  static constexpr std::array<double, 13> defaultCeilings() {
    std::array<double, 13> a{};
    a.fill(250.0);
    a[static_cast<std::size_t>(AircraftClass::FixedWingSingleEngine)] = 400.0;
    a[static_cast<std::size_t>(AircraftClass::FixedWingMultiEngine)] = 600.0;
    a[static_cast<std::size_t>(AircraftClass::Rotorcraft)] = 250.0;
    a[static_cast<std::size_t>(AircraftClass::Unknown)] = 600.0;
    return a;
  }
};

// --- per-segment math -------------------------------------------------------

/// Airborne observations with usable altitude/speed/course, as track points
/// (geometric altitude preferred, barometric fallback), sorted by time.
/// `dropped` receives the number of records rejected.
std::vector<TrackPoint> to_track_points(std::span<const StateVector> records, std::size_t* dropped = nullptr);

/// Consecutive points with identical (lat, lon, altMSL) keep the earliest.
std::vector<TrackPoint> dedupe_positions(std::span<const TrackPoint> pts);

struct SegmentSplit {
  std::vector<std::vector<TrackPoint>> segments;
  std::size_t discarded = 0;
};
/// Splits wherever consecutive times differ by more than maxGap and drops
/// pieces shorter than minPoints.
SegmentSplit segment(std::span<const TrackPoint> pts, const OutlierParams& params);

inline constexpr double kMadScale = 1.4826;

/// mask[i] = |x_i - med| > threshold * 1.4826 * MAD. When MAD is zero, a point
/// is flagged only if its deviation exceeds `zeroMadFloor`. Fewer than three
/// samples: nothing flagged.
std::vector<std::uint8_t> mad_outliers(std::span<const double> series, double threshold = 1.5,
                                       double zeroMadFloor = 25.0);

/// Gaussian-weighted moving average over a centred time window.
std::vector<double> gaussian_smooth(std::span<const double> values, std::span<const double> times,
                                    double window = 30.0, double sigma = 6.0);

/// Central differences inside, one-sided at the ends. One sample yields zero.
std::vector<double> numerical_gradient(std::span<const double> values, std::span<const double> times);

/// Removes points faster than the class ceiling; returns nullopt when fewer
/// than minPoints survive.
std::optional<std::vector<TrackPoint>> rate_outlier_filter(std::span<const TrackPoint> pts, AircraftClass cls,
                                                           const OutlierParams& params);

/// Resamples onto every whole second in [ceil(first), floor(last)]. Course
/// follows the shorter arc. Returns an empty vector for fewer than two inputs.
std::vector<TrackPoint> interpolate_1hz(std::span<const TrackPoint> pts);

/// Fills altAGL / agl / terrainSource. Ocean points sit over 0 ft MSL.
void attach_agl(std::span<TrackPoint> pts, const TerrainCache& terrain, const PolygonSet& land);

struct AirspaceVolume {
  Airspace cls = Airspace::Other;
  double floorFt = 0;    // MSL, inclusive
  double ceilingFt = 0;  // MSL, inclusive
  GeoPolygon area;
};

/// One volume per line:
///   B <floor_ft> <ceiling_ft> lat,lon lat,lon lat,lon ...
///   C <floor_ft> <ceiling_ft> circle lat,lon <radius_nm>
/// '#' starts a comment.
std::vector<AirspaceVolume> parse_airspace_volumes(std::string_view text);

/// Smallest-area volume containing the point horizontally and vertically.
Airspace classify_airspace(const TrackPoint& p, std::span<const AirspaceVolume> volumes);

// --- whole-aircraft and whole-archive processing -----------------------------

struct TrackCounts {
  std::size_t observations = 0;
  std::size_t rejectedObservations = 0;
  std::size_t altitudeOutliers = 0;
  std::size_t speedOutliers = 0;
  std::size_t segmentsDiscarded = 0;
  std::size_t segments = 0;
  std::size_t points = 0;
  std::size_t aglMissing = 0;
  std::size_t belowGround = 0;

  TrackCounts& operator+=(const TrackCounts& o);
};

struct TrackResources {
  const TerrainCache* terrain = nullptr;
  const PolygonSet* land = nullptr;
  std::span<const AirspaceVolume> airspace;
};

/// dedupe -> segment -> altitude MAD -> smooth -> rates -> speed outliers ->
/// 1 Hz interpolation -> AGL -> airspace.
std::vector<TrackSegment> process_aircraft(std::span<const StateVector> records, Icao24 icao24, AircraftClass cls,
                                           const OutlierParams& params, const TrackResources& res,
                                           TrackCounts* counts = nullptr);

inline constexpr std::string_view kProcessedHeader =
    "time,lat,lon,altMSL_ft,altAGL_ft,speed_kt,course_deg,vertRate_ftmin,accel_ktps,airspace,segmentId";

std::string format_processed(std::span<const TrackSegment> segments);

struct ProcessedRow {
  std::int64_t time = 0;
  double lat = 0, lon = 0, altMSL = 0;
  std::optional<double> altAGL;
  double speed = 0, course = 0, vertRate = 0, accel = 0;
  Airspace airspace = Airspace::Other;
  int segmentId = 0;
};
std::vector<ProcessedRow> parse_processed(std::string_view bytes);

struct ArchiveProcessStats {
  std::size_t members = 0;
  std::size_t unreadableMembers = 0;
  std::size_t aircraft = 0;
  std::size_t filesWritten = 0;
  TrackCounts tracks;
};

/// Processes one leaf archive (<year>/<class>/<seat-or-hour>/<range>.zip
/// under `archiveRoot`) and writes one file per aircraft to
/// <processedRoot>/<year>/<class>/<seat-or-hour>/<ICAO24>_<year>.csv.
ArchiveProcessStats process_archive(const std::filesystem::path& archive, const std::filesystem::path& archiveRoot,
                                    const std::filesystem::path& processedRoot, const OutlierParams& params,
                                    const TrackResources& res);

}  // namespace skytrack
