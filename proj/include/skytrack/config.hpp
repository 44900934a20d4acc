#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skytrack/runner.hpp"
#include "skytrack/stats.hpp"
#include "skytrack/tracks.hpp"

namespace skytrack {

/// Flat key = value settings. Relative paths resolve against the directory of
/// the file that set them; `include = other.cfg` pulls in another file.
struct PipelineConfig {
  struct Paths {
    std::string rawRoot;
    std::string organizedRoot;
    std::string archiveRoot;
    std::string processedRoot;
    std::string statsRoot;
    std::string reportRoot;
    std::string terrainRoot;
    std::string registryRoot;
  } roots;
  std::string polygon;   // filter polygon, GeoJSON
  std::string land;      // land polygons, GeoJSON; empty = everything is land
  std::string airspace;  // airspace volumes; empty = all Other
  std::string bins;      // histogram binning; empty = defaults
  std::string fetchUrl;  // {date} and {hour} placeholders
  std::vector<int> years;
  int workers = 1;
  Strategy strategy = Strategy::DynamicQueue;
  DistributionMode distribution = DistributionMode::Presence;
  bool plots = false;
  int compressionLevel = 1;
  OutlierParams tracks;

  /// Throws Error(Config) when a file-level setting is unknown or malformed.
  static PipelineConfig load(const std::filesystem::path& file);
  static PipelineConfig parse(std::string_view text, const std::filesystem::path& baseDir = ".");

  /// SKYTRACK_RAW_ROOT etc. replace the matching path setting when set.
  void apply_env();
  /// Years non-empty, set paths pairwise distinct, tracks params valid.
  /// `requireRoots` also demands every root directory be set.
  void validate(bool requireRoots = true) const;
  /// Every setting, fixed order, includes flattened, paths absolute.
  std::string serialize() const;

  std::filesystem::path raw_root() const { return roots.rawRoot; }
  std::filesystem::path organized_root() const { return roots.organizedRoot; }
  std::filesystem::path archive_root() const { return roots.archiveRoot; }
  std::filesystem::path processed_root() const { return roots.processedRoot; }
  std::filesystem::path stats_root() const { return roots.statsRoot; }
  std::filesystem::path report_root() const { return roots.reportRoot; }
  std::filesystem::path terrain_root() const { return roots.terrainRoot; }
  std::filesystem::path registry_root() const { return roots.registryRoot; }
};

}  // namespace skytrack
