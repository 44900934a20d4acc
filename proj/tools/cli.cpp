#include "cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "skytrack/config.hpp"
#include "skytrack/error.hpp"
#include "skytrack/fetch.hpp"
#include "skytrack/geo.hpp"
#include "skytrack/pipeline.hpp"
#include "skytrack/textio.hpp"
#include "skytrack/timeutil.hpp"

#ifndef SKYTRACK_VERSION
#define SKYTRACK_VERSION "unknown"
#endif
#ifndef SKYTRACK_BUILD_TYPE
#define SKYTRACK_BUILD_TYPE "unknown"
#endif

namespace skytrack::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;

std::string version_text() {
  std::ostringstream s;
  s << "skytrack " << SKYTRACK_VERSION << "\n"
    << "build: " << SKYTRACK_BUILD_TYPE << ", " << __DATE__ << "\n"
    << "compiler: " << __VERSION__ << "\n"
    << "openmp: " << _OPENMP << ", max threads " << omp_get_max_threads() << "\n";
  return s.str();
}

/// Flags shared by the stage commands; unset flags leave the config alone.
struct Common {
  std::string config;
  std::optional<int> workers;
  std::string strategy;
  std::string report;
  std::vector<int> years;
  bool verbose = false;
};

void add_common(CLI::App* sub, Common& c, bool withYears) {
  sub->add_option("--config", c.config, "Pipeline config file");
  sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--strategy", c.strategy, "static-uniform | dynamic-queue | size-sorted-dynamic");
  sub->add_option("--report", c.report, "Run report directory");
  if (withYears) sub->add_option("--year", c.years, "Data year (repeatable)");
  sub->add_flag("-v,--verbose", c.verbose, "Print every task and per-hour warnings");
}

PipelineConfig base_config(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : PipelineConfig::load(c.config);
  cfg.apply_env();
  if (c.workers) cfg.workers = *c.workers;
  if (!c.strategy.empty()) {
    auto s = parse_strategy(c.strategy);
    if (!s) throw Error(ErrorKind::Usage, "unknown strategy '" + c.strategy + "'");
    cfg.strategy = *s;
  }
  if (!c.report.empty()) cfg.roots.reportRoot = fs::absolute(c.report).lexically_normal().string();
  if (cfg.roots.reportRoot.empty()) cfg.roots.reportRoot = (fs::current_path() / "skytrack-reports").string();
  if (!c.years.empty()) cfg.years = c.years;
  return cfg;
}

void set_path(std::string& slot, const std::string& flag) {
  if (!flag.empty()) slot = fs::weakly_canonical(fs::absolute(flag)).string();
}

void require(const std::string& value, const char* what) {
  if (value.empty()) throw Error(ErrorKind::Usage, std::string(what) + " is required");
}

/// Years present in the raw tree, for organize runs that name none.
std::vector<int> years_in(const PipelineConfig& cfg) {
  std::set<int> ys;
  for (const auto& t : plan_stage(Stage::Organize, cfg))
    if (auto h = hour_stamp_from_name(fs::path(t.inputRef).filename().string())) ys.insert(h->year);
  return {ys.begin(), ys.end()};
}

int stage_exit(const std::vector<TaskResult>& results, bool verbose, std::ostream& out, std::ostream& err) {
  for (const auto& r : results) {
    if (r.outcome == Outcome::Failed) err << "failed: " << r.spec.inputRef << ": " << r.error << "\n";
    else if (verbose) err << to_string(r.outcome) << ": " << r.spec.inputRef << "\n";
  }
  auto s = summarize(results);
  out << format_report_table(results, s);
  return s.failed ? kExitFailure : 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ADS-B state vector pipeline: organize, archive, process and summarize."};
  app.set_version_flag("--version", version_text());
  app.require_subcommand(0, 1);

  std::function<int()> action;
  Common common;

  // fetch
  auto* fetch = app.add_subcommand("fetch", "Download hourly state-vector files");
  std::string fetchDate, fetchUrl, fetchRaw;
  int fetchDays = 1;
  fetch->add_option("--date", fetchDate, "First day, YYYY-MM-DD")->required();
  fetch->add_option("--days", fetchDays, "Number of days")->check(CLI::PositiveNumber);
  fetch->add_option("--url", fetchUrl, "URL template with {date} and {hour}");
  fetch->add_option("--raw", fetchRaw, "Raw data root");
  add_common(fetch, common, false);
  fetch->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      set_path(cfg.roots.rawRoot, fetchRaw);
      if (!fetchUrl.empty()) cfg.fetchUrl = fetchUrl;
      require(cfg.roots.rawRoot, "--raw");
      require(cfg.fetchUrl, "--url");
      auto first = CalendarDate::parse(fetchDate);
      if (!first) throw Error(ErrorKind::Usage, "bad --date '" + fetchDate + "'");
      std::string report = "date\tdownloaded\tup_to_date\tmissing\tchecksum_failed\n";
      const auto start = HourStamp{first->year, first->month, first->day, 0}.start_unix();
      for (int d = 0; d < fetchDays; ++d) {
        auto day = CalendarDate::from_unix(start + static_cast<std::int64_t>(d) * 86400);
        auto rep = fetch_day(day, cfg.fetchUrl, cfg.raw_root());
        if (common.verbose)
          for (const auto& w : rep.warnings) err << "warning: " << day.str() << ": " << w << "\n";
        else if (!rep.warnings.empty())
          err << "warning: " << day.str() << ": " << rep.warnings.size() << " hour(s) with problems (--verbose lists them)\n";
        report += day.str() + "\t" + std::to_string(rep.downloaded.size()) + "\t" + std::to_string(rep.upToDate.size()) +
                  "\t" + std::to_string(rep.missing.size()) + "\t" + std::to_string(rep.checksumFailed.size()) + "\n";
      }
      fs::create_directories(cfg.report_root());
      text::write_file_atomic(cfg.report_root() / "fetch_report.tsv", report);
      out << report;
      return 0;
    };
  });

  // organize
  auto* organize = app.add_subcommand("organize", "Filter hourly files into the per-aircraft hierarchy");
  std::string orgInput, orgRoot, orgRegistry, orgPolygon;
  organize->add_option("--input", orgInput, "Raw root with day directories");
  organize->add_option("--root", orgRoot, "Organized output root");
  organize->add_option("--registry", orgRegistry, "Registry root (<year>/<CC>.csv)");
  organize->add_option("--polygon", orgPolygon, "Filter polygon (GeoJSON)");
  add_common(organize, common, true);
  organize->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      set_path(cfg.roots.rawRoot, orgInput);
      set_path(cfg.roots.organizedRoot, orgRoot);
      set_path(cfg.roots.registryRoot, orgRegistry);
      set_path(cfg.polygon, orgPolygon);
      require(cfg.roots.rawRoot, "--input");
      require(cfg.roots.organizedRoot, "--root");
      require(cfg.roots.registryRoot, "--registry");
      require(cfg.polygon, "--polygon");
      if (cfg.years.empty()) cfg.years = years_in(cfg);
      if (cfg.years.empty()) {
        err << "warning: no hourly files under " << cfg.roots.rawRoot << "\n";
        cfg.years = {0};
      }
      cfg.validate(false);
      return stage_exit(run_stage(Stage::Organize, cfg), common.verbose, out, err);
    };
  });

  // pack
  auto* pack = app.add_subcommand("pack", "Zip each leaf directory and remove the loose files");
  std::string packRoot, packArchives;
  int packLevel = -1;
  pack->add_option("--root", packRoot, "Organized root");
  pack->add_option("--archives", packArchives, "Archive root");
  pack->add_option("--level", packLevel, "Deflate level 0-9")->check(CLI::Range(0, 9));
  add_common(pack, common, false);
  pack->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      set_path(cfg.roots.organizedRoot, packRoot);
      set_path(cfg.roots.archiveRoot, packArchives);
      if (packLevel >= 0) cfg.compressionLevel = packLevel;
      require(cfg.roots.organizedRoot, "--root");
      require(cfg.roots.archiveRoot, "--archives");
      if (cfg.years.empty()) cfg.years = {0};
      cfg.validate(false);
      return stage_exit(run_stage(Stage::Pack, cfg), common.verbose, out, err);
    };
  });

  // process
  auto* process = app.add_subcommand("process", "Clean, resample and annotate tracks from leaf archives");
  std::string procArchives, procOut, procTerrain, procLand, procAirspace;
  process->add_option("--archives", procArchives, "Archive root");
  process->add_option("--processed", procOut, "Processed output root");
  process->add_option("--terrain", procTerrain, "Terrain root (srtm3/, globe/)");
  process->add_option("--land", procLand, "Land polygons (GeoJSON)");
  process->add_option("--airspace", procAirspace, "Airspace volumes");
  add_common(process, common, false);
  process->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      set_path(cfg.roots.archiveRoot, procArchives);
      set_path(cfg.roots.processedRoot, procOut);
      set_path(cfg.roots.terrainRoot, procTerrain);
      set_path(cfg.land, procLand);
      set_path(cfg.airspace, procAirspace);
      require(cfg.roots.archiveRoot, "--archives");
      require(cfg.roots.processedRoot, "--processed");
      require(cfg.roots.terrainRoot, "--terrain");
      if (cfg.years.empty()) cfg.years = {0};
      cfg.validate(false);
      return stage_exit(run_stage(Stage::Process, cfg), common.verbose, out, err);
    };
  });

  // stats
  auto* stats = app.add_subcommand("stats", "Flight hours, histograms and type distribution tables");
  std::string statsProcessed, statsOut, statsBins, statsOrganized, statsArchives, statsMode;
  bool statsPlots = false;
  stats->add_option("--processed", statsProcessed, "Processed root");
  stats->add_option("--out", statsOut, "Output directory");
  stats->add_option("--bins", statsBins, "Binning config");
  stats->add_option("--organized", statsOrganized, "Organized root (type distribution)");
  stats->add_option("--archives", statsArchives, "Archive root (type distribution)");
  stats->add_option("--mode", statsMode, "presence | aircraft-share");
  stats->add_flag("--plots", statsPlots, "Also write a gnuplot script");
  add_common(stats, common, false);
  stats->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      set_path(cfg.roots.processedRoot, statsProcessed);
      set_path(cfg.roots.statsRoot, statsOut);
      set_path(cfg.bins, statsBins);
      set_path(cfg.roots.organizedRoot, statsOrganized);
      set_path(cfg.roots.archiveRoot, statsArchives);
      if (!statsMode.empty()) {
        auto m = parse_distribution_mode(statsMode);
        if (!m) throw Error(ErrorKind::Usage, "unknown --mode '" + statsMode + "'");
        cfg.distribution = *m;
      }
      if (statsPlots) cfg.plots = true;
      require(cfg.roots.processedRoot, "--processed");
      require(cfg.roots.statsRoot, "--out");
      if (cfg.years.empty()) cfg.years = {0};
      cfg.validate(false);
      auto res = run_stats(cfg);
      std::string report;
      for (const auto& f : res.files) report += f.string() + "\n";
      fs::create_directories(cfg.report_root());
      text::write_file_atomic(cfg.report_root() / "stats_report.txt", report);
      out << report;
      return 0;
    };
  });

  // e2e
  auto* e2e = app.add_subcommand("e2e", "organize, pack, process and stats in one run");
  add_common(e2e, common, false);
  e2e->callback([&] {
    action = [&] {
      if (common.config.empty()) throw Error(ErrorKind::Usage, "--config is required");
      auto cfg = base_config(common);
      cfg.validate();
      auto r = run_e2e(cfg);
      out << r.manifest;
      for (const auto& f : r.stats.files) out << "wrote " << f.string() << "\n";
      return r.ok() ? 0 : kExitFailure;
    };
  });

  // run
  auto* runCmd = app.add_subcommand("run", "Run one stage with an explicit pool setup");
  std::string runStage, retryFailed;
  runCmd->add_option("--stage", runStage, "organize | pack | process")->required();
  runCmd->add_option("--retry-failed", retryFailed, "Rerun only the failed tasks of this report (.tsv)");
  add_common(runCmd, common, false);
  runCmd->callback([&] {
    action = [&] {
      if (common.config.empty()) throw Error(ErrorKind::Usage, "--config is required");
      auto stage = parse_stage(runStage);
      if (!stage) throw Error(ErrorKind::Usage, "unknown stage '" + runStage + "'");
      auto cfg = base_config(common);
      cfg.validate();
      std::optional<std::vector<TaskSpec>> tasks;
      if (!retryFailed.empty()) {
        auto prior = parse_report_tsv(text::read_file(retryFailed));
        tasks = failed_tasks(prior);
        for (const auto& t : *tasks)
          if (t.stage != *stage) throw Error(ErrorKind::Usage, "report holds tasks of another stage");
      }
      return stage_exit(run_stage(*stage, cfg, std::move(tasks)), common.verbose, out, err);
    };
  });

  // build-polygon
  auto* poly = app.add_subcommand("build-polygon", "Convex hull of country outlines plus a buffer");
  std::string polyIn, polyOut, polyPlot;
  double bufferNm = 60.0;
  poly->add_option("--countries", polyIn, "Country polygons (GeoJSON)")->required();
  poly->add_option("--buffer-nm", bufferNm, "Buffer distance in nautical miles")->check(CLI::NonNegativeNumber);
  poly->add_option("--out", polyOut, "Output GeoJSON")->required();
  poly->add_option("--plot", polyPlot, "Also write 'lat lon' text for plotting");
  poly->callback([&] {
    action = [&] {
      auto set = read_geojson_polygons(text::read_file(polyIn));
      std::vector<GeoPoint> pts;
      for (const auto& p : set)
        for (const auto& v : p.outer.vertices()) pts.push_back(v);
      auto filter = buffer_polygon(convex_hull(pts), bufferNm);
      text::write_file_atomic(polyOut, to_geojson(filter));
      if (!polyPlot.empty()) text::write_file_atomic(polyPlot, to_plot_text(filter));
      out << "filter polygon: " << filter.size() << " vertices -> " << polyOut << "\n";
      return 0;
    };
  });

  // show-config
  auto* show = app.add_subcommand("show-config", "Print the effective configuration");
  add_common(show, common, false);
  show->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      cfg.validate();
      out << cfg.serialize();
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForVersion&) {
    out << version_text();
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return e.kind() == ErrorKind::Config ? kExitConfig : e.kind() == ErrorKind::Usage ? kExitUsage : kExitFailure;
  }
  if (!action) {
    err << app.help();
    return kExitUsage;
  }
  try {
    return action();
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Usage: return kExitUsage;
      case ErrorKind::Config: return kExitConfig;
      default: return kExitFailure;
    }
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace skytrack::cli
