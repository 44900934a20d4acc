#include "skytrack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>

#include "skytrack/archive.hpp"
#include "skytrack/error.hpp"
#include "skytrack/ingest.hpp"
#include "skytrack/textio.hpp"

namespace skytrack {

namespace fs = std::filesystem;

namespace {

bool is_hour_file(const fs::path& p) {
  auto name = p.filename().string();
  return name.ends_with(".csv") || name.ends_with(".csv.gz");
}

std::string rel_ref(const fs::path& p, const fs::path& root) { return fs::relative(p, root).generic_string(); }

}  // namespace

StageResources::StageResources(const PipelineConfig& cfg, Stage stage) {
  if (stage == Stage::Organize) {
    for (int y : cfg.years) {
      auto lookup = load_registry_year(cfg.registry_root(), y);
      hierarchies_.emplace(y, Hierarchy(lookup));
      lookups_.emplace(y, std::move(lookup));
    }
    if (cfg.polygon.empty()) throw Error(ErrorKind::Config, "polygon is not set");
    auto polys = read_geojson_polygons(text::read_file(cfg.polygon));
    if (polys.size() != 1 || !polys.front().holes.empty())
      throw Error(ErrorKind::Config, "filter polygon file must hold exactly one polygon without holes");
    filter_ = polys.front().outer;
  }
  if (stage == Stage::Process) {
    if (!cfg.land.empty()) land_ = read_geojson_polygons(text::read_file(cfg.land));
    if (!cfg.airspace.empty()) airspace_ = parse_airspace_volumes(text::read_file(cfg.airspace));
    terrain_ = std::make_unique<TerrainCache>(cfg.terrain_root());
  }
}

const RegistryLookup* StageResources::lookup(int year) const {
  auto it = lookups_.find(year);
  return it == lookups_.end() ? nullptr : &it->second;
}

const Hierarchy* StageResources::hierarchy(int year) const {
  auto it = hierarchies_.find(year);
  return it == hierarchies_.end() ? nullptr : &it->second;
}

TrackResources StageResources::tracks() const { return {terrain_.get(), &land_, airspace_}; }

std::vector<TaskSpec> plan_stage(Stage stage, const PipelineConfig& cfg) {
  std::vector<std::pair<std::string, std::optional<std::uint64_t>>> inputs;
  switch (stage) {
    case Stage::Organize: {
      if (!fs::is_directory(cfg.raw_root())) break;
      for (const auto& day : fs::directory_iterator(cfg.raw_root())) {
        if (!day.is_directory()) continue;
        for (const auto& f : fs::directory_iterator(day.path()))
          if (f.is_regular_file() && is_hour_file(f.path()))
            inputs.emplace_back(rel_ref(f.path(), cfg.raw_root()), f.file_size());
      }
      break;
    }
    case Stage::Pack:
      for (const auto& leaf : find_leaf_dirs(cfg.organized_root())) {
        std::uint64_t files = 0;
        for (const auto& f : fs::directory_iterator(leaf)) files += f.is_regular_file() ? 1 : 0;
        inputs.emplace_back(rel_ref(leaf, cfg.organized_root()), files);
      }
      break;
    case Stage::Process:
      for (const auto& a : find_archives(cfg.archive_root()))
        inputs.emplace_back(rel_ref(a, cfg.archive_root()), fs::file_size(a));
      break;
  }
  return plan(stage, std::move(inputs));
}

namespace {

using I = std::int64_t;

TaskReport organize_task(const TaskSpec& t, const PipelineConfig& cfg, const StageResources& res) {
  const fs::path file = cfg.raw_root() / t.inputRef;
  auto hour = hour_stamp_from_name(file.filename().string());
  if (!hour) hour = hour_stamp_from_name(t.inputRef);
  if (!hour) throw Error(ErrorKind::Input, "no hour stamp in " + t.inputRef);
  const auto* lookup = res.lookup(hour->year);
  if (!lookup) return {Outcome::Skipped, {}};
  auto s = organize_hour_file(file, *lookup, *res.hierarchy(hour->year), res.filter(), cfg.organized_root());
  return {Outcome::Ok,
          {{"rawCount", static_cast<I>(s.rawCount)},
           {"malformedRows", static_cast<I>(s.malformedRows)},
           {"qualityDropped", static_cast<I>(s.qualityDropped)},
           {"geoDropped", static_cast<I>(s.geoDropped)},
           {"organizedCount", static_cast<I>(s.organizedCount)},
           {"filesWritten", static_cast<I>(s.filesWritten)}}};
}

TaskReport pack_task(const TaskSpec& t, const PipelineConfig& cfg) {
  ArchiveOptions opts;
  opts.level = cfg.compressionLevel;
  auto leaf = pack_leaf(cfg.organized_root() / t.inputRef, cfg.organized_root(), cfg.archive_root(), opts);
  if (!leaf) return {Outcome::Skipped, {}};
  I bytes = 0;
  for (const auto& m : leaf->members) bytes += static_cast<I>(m.size);
  return {Outcome::Ok, {{"members", static_cast<I>(leaf->memberCount())}, {"memberBytes", bytes}}};
}

TaskReport process_task(const TaskSpec& t, const PipelineConfig& cfg, const StageResources& res) {
  auto s = process_archive(cfg.archive_root() / t.inputRef, cfg.archive_root(), cfg.processed_root(), cfg.tracks,
                           res.tracks());
  return {Outcome::Ok,
          {{"members", static_cast<I>(s.members)},
           {"unreadableMembers", static_cast<I>(s.unreadableMembers)},
           {"aircraft", static_cast<I>(s.aircraft)},
           {"filesWritten", static_cast<I>(s.filesWritten)},
           {"observations", static_cast<I>(s.tracks.observations)},
           {"rejectedObservations", static_cast<I>(s.tracks.rejectedObservations)},
           {"altitudeOutliers", static_cast<I>(s.tracks.altitudeOutliers)},
           {"speedOutliers", static_cast<I>(s.tracks.speedOutliers)},
           {"segmentsDiscarded", static_cast<I>(s.tracks.segmentsDiscarded)},
           {"segments", static_cast<I>(s.tracks.segments)},
           {"points", static_cast<I>(s.tracks.points)},
           {"aglMissing", static_cast<I>(s.tracks.aglMissing)},
           {"belowGround", static_cast<I>(s.tracks.belowGround)}}};
}

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_reports(Stage stage, const PipelineConfig& cfg, const std::vector<TaskResult>& results) {
  const fs::path dir = cfg.report_root();
  fs::create_directories(dir);
  const std::string name(to_string(stage));
  text::write_file_atomic(dir / (name + "_report.tsv"), format_report_tsv(results));
  text::write_file_atomic(dir / (name + "_report.txt"), format_report_table(results, summarize(results)));
  std::ofstream log(dir / "run.log", std::ios::app);
  const auto stamp = timestamp_utc();
  for (const auto& r : results) {
    log << stamp << '\t' << name << '\t' << r.spec.inputRef << '\t' << to_string(r.outcome) << '\t'
        << text::fmt_fixed(r.elapsed, 3);
    if (!r.error.empty()) log << '\t' << r.error;
    log << '\n';
  }
}

}  // namespace

TaskBody stage_body(Stage stage, const PipelineConfig& cfg, const StageResources& res) {
  switch (stage) {
    case Stage::Organize: return [&cfg, &res](const TaskSpec& t) { return organize_task(t, cfg, res); };
    case Stage::Pack: return [&cfg](const TaskSpec& t) { return pack_task(t, cfg); };
    case Stage::Process: return [&cfg, &res](const TaskSpec& t) { return process_task(t, cfg, res); };
  }
  throw Error(ErrorKind::Usage, "unknown stage");
}

std::vector<TaskResult> run_stage(Stage stage, const PipelineConfig& cfg, std::optional<std::vector<TaskSpec>> tasks) {
  StageResources res(cfg, stage);
  auto specs = tasks ? std::move(*tasks) : plan_stage(stage, cfg);
  auto results = execute(specs, cfg.workers, cfg.strategy, stage_body(stage, cfg, res));
  write_reports(stage, cfg, results);
  return results;
}

StatsOutputs run_stats(const PipelineConfig& cfg) {
  BinningConfig bins;
  if (!cfg.bins.empty()) bins = BinningConfig::parse(text::read_file(cfg.bins));
  auto fh = flight_hours(cfg.processed_root(), bins);
  auto presence = collect_presence(cfg.organized_root(), cfg.archive_root());
  return write_stats(cfg.stats_root(), fh, &presence, cfg.distribution, cfg.plots);
}

std::string counts_manifest(const std::vector<TaskResult>& organize, const std::vector<TaskResult>& pack,
                            const std::vector<TaskResult>& process) {
  static constexpr std::array<const char*, 6> kOrganize = {"rawCount",   "malformedRows",  "qualityDropped",
                                                           "geoDropped", "organizedCount", "filesWritten"};
  auto get = [](const TaskResult& r, const char* k) {
    auto it = r.counts.find(k);
    return it == r.counts.end() ? I{0} : it->second;
  };
  std::string out = "organize\tinput";
  for (auto k : kOrganize) out += std::string("\t") + k;
  out += '\n';
  std::array<I, 6> total{};
  for (const auto& r : organize) {
    out += "organize\t" + r.spec.inputRef;
    for (std::size_t i = 0; i < kOrganize.size(); ++i) {
      I v = get(r, kOrganize[i]);
      total[i] += v;
      out += '\t' + std::to_string(v);
    }
    out += '\n';
  }
  out += "organize\ttotal";
  for (I v : total) out += '\t' + std::to_string(v);
  out += '\n';

  I archives = 0, members = 0;
  for (const auto& r : pack) {
    archives += r.outcome == Outcome::Ok ? 1 : 0;
    members += get(r, "members");
  }
  out += "pack\tarchives\t" + std::to_string(archives) + "\n";
  out += "pack\tmembers\t" + std::to_string(members) + "\n";
  I files = 0, segments = 0;
  for (const auto& r : process) {
    files += get(r, "filesWritten");
    segments += get(r, "segments");
  }
  out += "process\tfiles\t" + std::to_string(files) + "\n";
  out += "process\tsegments\t" + std::to_string(segments) + "\n";
  return out;
}

bool E2eResult::ok() const {
  auto clean = [](const std::vector<TaskResult>& rs) {
    return std::none_of(rs.begin(), rs.end(), [](const auto& r) { return r.outcome == Outcome::Failed; });
  };
  return clean(organize) && clean(pack) && clean(process);
}

E2eResult run_e2e(const PipelineConfig& cfg) {
  E2eResult r;
  r.organize = run_stage(Stage::Organize, cfg);
  r.pack = run_stage(Stage::Pack, cfg);
  r.process = run_stage(Stage::Process, cfg);
  r.stats = run_stats(cfg);
  r.manifest = counts_manifest(r.organize, r.pack, r.process);
  text::write_file_atomic(cfg.report_root() / "e2e_manifest.txt", r.manifest);
  return r;
}

}  // namespace skytrack
