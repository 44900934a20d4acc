#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skytrack/config.hpp"
#include "skytrack/geo.hpp"
#include "skytrack/registry.hpp"
#include "skytrack/runner.hpp"
#include "skytrack/stats.hpp"
#include "skytrack/terrain.hpp"
#include "skytrack/tracks.hpp"

namespace skytrack {

/// Inputs shared read-only by every task of a run. Built before the pool starts.
class StageResources {
 public:
  StageResources(const PipelineConfig& cfg, Stage stage);

  const RegistryLookup* lookup(int year) const;
  const Hierarchy* hierarchy(int year) const;
  const GeoPolygon& filter() const { return *filter_; }
  TrackResources tracks() const;

 private:
  std::map<int, RegistryLookup> lookups_;
  std::map<int, Hierarchy> hierarchies_;
  std::optional<GeoPolygon> filter_;
  PolygonSet land_;
  std::vector<AirspaceVolume> airspace_;
  std::unique_ptr<TerrainCache> terrain_;
};

/// Hour files under <raw>/<day>/, leaf directories, or leaf archives.
std::vector<TaskSpec> plan_stage(Stage stage, const PipelineConfig& cfg);

TaskBody stage_body(Stage stage, const PipelineConfig& cfg, const StageResources& res);

/// Plans (unless `tasks` is given), executes and writes
/// <report>/<stage>_report.{tsv,txt} plus one line per task in <report>/run.log.
std::vector<TaskResult> run_stage(Stage stage, const PipelineConfig& cfg,
                                  std::optional<std::vector<TaskSpec>> tasks = std::nullopt);

StatsOutputs run_stats(const PipelineConfig& cfg);

/// Timing-free summary of an end-to-end run: per-hour organize counts,
/// then pack and process totals.
std::string counts_manifest(const std::vector<TaskResult>& organize, const std::vector<TaskResult>& pack,
                            const std::vector<TaskResult>& process);

struct E2eResult {
  std::vector<TaskResult> organize, pack, process;
  StatsOutputs stats;
  std::string manifest;
  bool ok() const;
};

/// organize -> pack -> process -> stats; writes <report>/e2e_manifest.txt.
E2eResult run_e2e(const PipelineConfig& cfg);

}  // namespace skytrack
