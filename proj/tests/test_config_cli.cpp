#include <doctest.h>
#include <httplib.h>

#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "skytrack/archive.hpp"
#include "skytrack/config.hpp"
#include "skytrack/error.hpp"
#include "skytrack/fetch.hpp"
#include "skytrack/pipeline.hpp"
#include "skytrack/textio.hpp"
#include "support.hpp"

using namespace skytrack;
namespace fs = std::filesystem;
using testutil::TempDir;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "skytrack");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

/// Config that includes `base` and sends every output under `outDir`.
fs::path redirect_outputs(const fs::path& cfgFile, const fs::path& base, const std::string& outDir) {
  text::write_file_atomic(cfgFile, "include = " + base.string() + "\n" +
                                       "organized_root = " + outDir + "/organized\n" +
                                       "archive_root = " + outDir + "/archives\n" +
                                       "processed_root = " + outDir + "/processed\n" +
                                       "stats_root = " + outDir + "/stats\n" +
                                       "report_root = " + outDir + "/reports\n");
  return cfgFile;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) m[fs::relative(e.path(), root).generic_string()] = text::read_file(e.path());
  return m;
}

const std::vector<std::string> kStatsTables = {"flight_hours.csv", "hist_altitude.csv", "hist_speed.csv",
                                               "type_distribution.csv", "excluded_points.csv"};

}  // namespace

TEST_CASE("config: serialize is a fixed point") {
  TempDir tmp;
  auto cfgFile = testutil::copy_e2e_fixture(tmp / "fx");
  auto cfg = PipelineConfig::load(cfgFile);
  CHECK(cfg.years == std::vector<int>{2020});
  CHECK(cfg.workers == 2);
  CHECK(cfg.plots);
  CHECK(fs::path(cfg.roots.rawRoot) == fs::weakly_canonical(tmp / "fx" / "raw"));
  auto text = cfg.serialize();
  auto again = PipelineConfig::parse(text, tmp.path());
  CHECK(again.serialize() == text);
}

TEST_CASE("config: includes, cycles and unknown keys") {
  TempDir tmp;
  text::write_file_atomic(tmp / "base.cfg", "years = 2019\nworkers = 3\nraw_root = raw\n");
  fs::create_directories(tmp / "sub");
  text::write_file_atomic(tmp / "sub" / "child.cfg", "include = ../base.cfg\nworkers = 5\nstats_root = s\n");
  auto c = PipelineConfig::load(tmp / "sub" / "child.cfg");
  CHECK(c.workers == 5);
  CHECK(c.years == std::vector<int>{2019});
  // each relative path resolves against the file that set it
  CHECK(fs::path(c.roots.rawRoot) == fs::weakly_canonical(tmp / "raw"));
  CHECK(fs::path(c.roots.statsRoot) == fs::weakly_canonical(tmp / "sub" / "s"));

  text::write_file_atomic(tmp / "a.cfg", "include = b.cfg\n");
  text::write_file_atomic(tmp / "b.cfg", "include = a.cfg\n");
  try {
    PipelineConfig::load(tmp / "a.cfg");
    FAIL("cycle accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("include cycle") != std::string::npos);
  }

  CHECK_THROWS_AS(PipelineConfig::parse("colour = blue\n"), Error);
  CHECK_THROWS_AS(PipelineConfig::parse("workers = many\n"), Error);
  CHECK_THROWS_AS(PipelineConfig::load(tmp / "absent.cfg"), Error);
}

TEST_CASE("config: environment overrides path settings") {
  TempDir tmp;
  auto cfg = PipelineConfig::load(testutil::copy_e2e_fixture(tmp / "fx"));
  const auto target = (tmp / "elsewhere").string();
  ::setenv("SKYTRACK_STATS_ROOT", target.c_str(), 1);
  cfg.apply_env();
  ::unsetenv("SKYTRACK_STATS_ROOT");
  CHECK(fs::path(cfg.roots.statsRoot) == fs::path(target));
  CHECK(fs::path(cfg.roots.rawRoot) == fs::weakly_canonical(tmp / "fx" / "raw"));
}

TEST_CASE("config: validation") {
  TempDir tmp;
  auto cfg = PipelineConfig::load(testutil::copy_e2e_fixture(tmp / "fx"));
  CHECK_NOTHROW(cfg.validate());
  auto c = cfg;
  c.years.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c = cfg;
  c.roots.statsRoot = c.roots.processedRoot;
  try {
    c.validate();
    FAIL("collision accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    std::string msg = e.what();
    CHECK(msg.find("processed_root") != std::string::npos);
    CHECK(msg.find("stats_root") != std::string::npos);
  }
  c = cfg;
  c.roots.terrainRoot.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_NOTHROW(c.validate(false));
}

TEST_CASE("cli: exit codes and messages") {
  CHECK(run_cli({}).code == 2);
  auto bad = run_cli({"frobnicate"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("error[usage]") != std::string::npos);

  auto v = run_cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("skytrack 0.4.0") != std::string::npos);
  CHECK(v.out.find("openmp") != std::string::npos);

  CHECK(run_cli({"--help"}).code == 0);
  CHECK(run_cli({"e2e"}).code == 2);
  CHECK(run_cli({"run", "--stage", "organize"}).code == 2);

  TempDir tmp;
  auto base = testutil::copy_e2e_fixture(tmp / "fx");
  text::write_file_atomic(tmp / "fx" / "clash.cfg", "include = fixture.cfg\nstats_root = out/processed\n");
  auto clash = run_cli({"show-config", "--config", (tmp / "fx" / "clash.cfg").string()});
  CHECK(clash.code == 3);
  CHECK(clash.err.find("error[config]") != std::string::npos);
  CHECK(clash.err.find("path collision") != std::string::npos);

  text::write_file_atomic(tmp / "fx" / "typo.cfg", "include = fixture.cfg\nworkerz = 2\n");
  CHECK(run_cli({"show-config", "--config", (tmp / "fx" / "typo.cfg").string()}).code == 3);

  auto show = run_cli({"show-config", "--config", base.string(), "--workers", "4"});
  CHECK(show.code == 0);
  CHECK(show.out.find("workers = 4") != std::string::npos);
  CHECK(run_cli({"show-config", "--config", base.string(), "--strategy", "round-robin"}).code == 2);
}

TEST_CASE("e2e: fixture run matches the reference manifest and repeats byte for byte") {
  TempDir tmp;
  auto base = testutil::copy_e2e_fixture(tmp / "fx");
  const auto reference = text::read_file(tmp / "fx" / "reference_manifest.txt");

  auto first = run_cli({"e2e", "--config", base.string()});
  INFO(first.err);
  REQUIRE(first.code == 0);
  CHECK(text::read_file(tmp / "fx" / "out" / "reports" / "e2e_manifest.txt") == reference);

  auto second = redirect_outputs(tmp / "second.cfg", base, (tmp / "second").string());
  auto again = run_cli({"e2e", "--config", second.string(), "--workers", "3", "--strategy", "static-uniform"});
  REQUIRE(again.code == 0);
  CHECK(text::read_file(tmp / "second" / "reports" / "e2e_manifest.txt") == reference);
  for (const auto& name : kStatsTables) {
    INFO(name);
    CHECK(text::read_file(tmp / "fx" / "out" / "stats" / name) == text::read_file(tmp / "second" / "stats" / name));
  }
  CHECK(tree_contents(tmp / "fx" / "out" / "processed") == tree_contents(tmp / "second" / "processed"));
  CHECK(tree_contents(tmp / "fx" / "out" / "archives") == tree_contents(tmp / "second" / "archives"));
}

TEST_CASE("e2e: stages run one at a time give the same outputs") {
  TempDir tmp;
  auto base = testutil::copy_e2e_fixture(tmp / "fx");
  REQUIRE(run_cli({"e2e", "--config", base.string()}).code == 0);

  auto split = redirect_outputs(tmp / "split.cfg", base, (tmp / "split").string()).string();
  for (const char* stage : {"organize", "pack", "process", "stats"}) {
    auto r = run_cli({stage, "--config", split});
    INFO(stage << ": " << r.err);
    REQUIRE(r.code == 0);
  }
  for (const auto& name : kStatsTables) {
    INFO(name);
    CHECK(text::read_file(tmp / "fx" / "out" / "stats" / name) == text::read_file(tmp / "split" / "stats" / name));
  }
  CHECK(tree_contents(tmp / "fx" / "out" / "processed") == tree_contents(tmp / "split" / "processed"));
  // pack removed every loose file
  CHECK(find_leaf_dirs(tmp / "split" / "organized").empty());
}

TEST_CASE("pipeline: one pack task per leaf directory") {
  TempDir tmp;
  PipelineConfig cfg;
  cfg.roots.organizedRoot = (tmp / "org").string();
  cfg.years = {2020};
  for (int i = 0; i < 37; ++i) {
    char range[32];
    std::snprintf(range, sizeof range, "A%05X_A%05X", i * 16, i * 16 + 15);
    auto leaf = tmp / "org" / "2020" / (i % 2 ? "Rotorcraft" : "FixedWingSingleEngine") / "Seats_001_010" / range;
    fs::create_directories(leaf);
    for (int h = 0; h <= i % 3; ++h)
      text::write_file_atomic(leaf / organized_file_name({2020, 6, 22, h}, Icao24::from_value(0xA00000u + static_cast<std::uint32_t>(i) * 16)), "x\n");
  }
  // an empty leaf and a stray top-level file plan nothing
  fs::create_directories(tmp / "org" / "2020" / "Rotorcraft" / "Seats_001_010" / "B00000_B0000F");
  text::write_file_atomic(tmp / "org" / "2020" / "notes.txt", "x");
  auto tasks = plan_stage(Stage::Pack, cfg);
  CHECK(tasks.size() == 37);
  std::uint64_t files = 0;
  for (const auto& t : tasks) {
    CHECK(t.stage == Stage::Pack);
    files += t.sizeHint.value_or(0);
  }
  CHECK(files == 12 * 3 + 13 * 1 + 12 * 2);
}

TEST_CASE("cli: run --retry-failed reruns only the failed tasks") {
  TempDir tmp;
  auto base = testutil::copy_e2e_fixture(tmp / "fx");
  const auto bad = tmp / "fx" / "raw" / "2020-06-22" / "states_2020-06-22-15.csv.gz";
  text::write_file_atomic(bad, "this is not gzip");
  const auto cfg = base.string();

  auto first = run_cli({"run", "--stage", "organize", "--config", cfg});
  CHECK(first.code == 1);
  CHECK(first.err.find("failed: 2020-06-22/states_2020-06-22-15.csv.gz") != std::string::npos);
  const auto report = tmp / "fx" / "out" / "reports" / "organize_report.tsv";
  auto prior = parse_report_tsv(text::read_file(report));
  CHECK(prior.size() == 3);
  CHECK(failed_tasks(prior).size() == 1);

  // copy the retry input aside; the rerun overwrites the report
  fs::copy_file(report, tmp / "prior.tsv");
  const auto good = text::read_file(tmp / "fx" / "raw" / "2020-06-22" / "states_2020-06-22-13.csv.gz");
  text::write_file_atomic(bad, good);
  auto retry = run_cli({"run", "--stage", "organize", "--config", cfg, "--retry-failed", (tmp / "prior.tsv").string(),
                    "--verbose"});
  INFO(retry.err);
  CHECK(retry.code == 0);
  auto rerun = parse_report_tsv(text::read_file(report));
  REQUIRE(rerun.size() == 1);
  CHECK(rerun[0].spec.inputRef == "2020-06-22/states_2020-06-22-15.csv.gz");
  CHECK(rerun[0].outcome == Outcome::Ok);
  CHECK(retry.err.find("ok: 2020-06-22/states_2020-06-22-15.csv.gz") != std::string::npos);

  CHECK(run_cli({"run", "--stage", "pack", "--config", cfg, "--retry-failed", (tmp / "prior.tsv").string()}).code == 2);
}

namespace {

/// Serves /data/<name> from an in-memory map on a loopback port.
class FileServer {
 public:
  FileServer() {
    server_.Get(R"(/data/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      auto it = files_.find(req.matches[1]);
      if (it == files_.end()) {
        res.status = 404;
        return;
      }
      res.set_content(it->second, "application/octet-stream");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FileServer() {
    server_.stop();
    thread_.join();
  }
  void put(const std::string& name, std::string body) {
    std::lock_guard lock(mu_);
    files_[name] = std::move(body);
  }
  void remove(const std::string& name) {
    std::lock_guard lock(mu_);
    files_.erase(name);
  }
  std::string url_template() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/data/states_{date}-{hour}.csv.gz";
  }

 private:
  httplib::Server server_;
  std::mutex mu_;
  std::map<std::string, std::string> files_;
  int port_ = 0;
  std::thread thread_;
};

std::string hour_name(const std::string& date, int h) {
  char hh[4];
  std::snprintf(hh, sizeof hh, "%02d", h);
  return "states_" + date + "-" + hh + ".csv.gz";
}

}  // namespace

TEST_CASE("fetch: missing hours, reruns and checksums against a local server") {
  TempDir tmp;
  FileServer srv;
  const CalendarDate day{2020, 6, 22};
  for (int h = 0; h < 24; ++h)
    if (h != 5 && h != 17) srv.put(hour_name("2020-06-22", h), "payload for hour " + std::to_string(h));
  srv.put(hour_name("2020-06-22", 3) + ".sha256", sha256_hex("payload for hour 3") + "  file\n");

  auto rep = fetch_day(day, srv.url_template(), tmp.path());
  CHECK(rep.downloaded.size() == 22);
  CHECK(rep.missing.size() == 2);
  CHECK(rep.warnings.size() == 2);
  CHECK(rep.checksumFailed.empty());
  std::size_t onDisk = 0;
  for (const auto& e : fs::directory_iterator(tmp / "2020-06-22")) onDisk += e.is_regular_file();
  CHECK(onDisk == 22);
  CHECK(text::read_file(tmp / "2020-06-22" / hour_name("2020-06-22", 9)) == "payload for hour 9");

  auto again = fetch_day(day, srv.url_template(), tmp.path());
  CHECK(again.downloaded.empty());
  CHECK(again.upToDate.size() == 22);
  CHECK(again.missing.size() == 2);

  // a changed remote size triggers a download; a bad checksum discards it
  srv.put(hour_name("2020-06-22", 3), "payload for hour 3, revised");
  srv.put(hour_name("2020-06-22", 4), "payload for hour 4, revised");
  srv.put(hour_name("2020-06-22", 4) + ".sha256", std::string(64, '0'));
  auto third = fetch_day(day, srv.url_template(), tmp.path());
  CHECK(third.downloaded.empty());
  CHECK(third.checksumFailed.size() == 2);
  CHECK(text::read_file(tmp / "2020-06-22" / hour_name("2020-06-22", 4)) == "payload for hour 4");
  CHECK(third.upToDate.size() == 20);

  srv.put(hour_name("2020-06-22", 4) + ".sha256", sha256_hex("payload for hour 4, revised"));
  srv.remove(hour_name("2020-06-22", 3) + ".sha256");
  auto fourth = fetch_day(day, srv.url_template(), tmp.path());
  CHECK(fourth.downloaded.size() == 2);
  CHECK(text::read_file(tmp / "2020-06-22" / hour_name("2020-06-22", 4)) == "payload for hour 4, revised");
}

TEST_CASE("fetch: command line warnings and unreachable endpoints") {
  TempDir tmp;
  {
    FileServer srv;
    for (int h = 0; h < 24; ++h)
      if (h != 5 && h != 17) srv.put(hour_name("2020-06-22", h), "p" + std::to_string(h));
    const std::vector<std::string> args = {"fetch",    "--date",   "2020-06-22",         "--url", srv.url_template(),
                                           "--raw",    (tmp / "raw").string(), "--report", (tmp / "rep").string()};
    auto quiet = run_cli(args);
    CHECK(quiet.code == 0);
    CHECK(quiet.err.find("2 hour(s) with problems") != std::string::npos);
    CHECK(quiet.out.find("2020-06-22\t22\t0\t2\t0") != std::string::npos);
    auto verbose_args = args;
    verbose_args.push_back("--verbose");
    auto loud = run_cli(verbose_args);
    CHECK(loud.out.find("2020-06-22\t0\t22\t2\t0") != std::string::npos);
    CHECK(loud.err.find("hour 5 unavailable") != std::string::npos);
    CHECK(loud.err.find("hour 17 unavailable") != std::string::npos);
  }

  // the .invalid top-level domain never resolves
  const std::string url = "http://skytrack-test.invalid/data/states_{date}-{hour}.csv.gz";
  try {
    fetch_day({2020, 6, 22}, url, tmp / "raw2");
    FAIL("unreachable endpoint accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Network);
  }
  auto r = run_cli({"fetch", "--date", "2020-06-22", "--url", url, "--raw", (tmp / "raw2").string(), "--report",
                (tmp / "rep").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("error[network]") != std::string::npos);
  CHECK(!fs::exists(tmp / "raw2" / "2020-06-22"));
}
