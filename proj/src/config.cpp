#include "skytrack/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <set>

#include "skytrack/error.hpp"
#include "skytrack/textio.hpp"

namespace skytrack {

namespace fs = std::filesystem;

namespace {

struct PathKey {
  std::string_view key;
  std::string PipelineConfig::*file = nullptr;
  std::string PipelineConfig::Paths::*root = nullptr;

  std::string& ref(PipelineConfig& c) const { return file ? c.*file : c.roots.*root; }
  const std::string& ref(const PipelineConfig& c) const { return file ? c.*file : c.roots.*root; }
};

const std::vector<PathKey>& path_keys() {
  using P = PipelineConfig::Paths;
  static const std::vector<PathKey> keys = {
      {"raw_root", nullptr, &P::rawRoot},
      {"organized_root", nullptr, &P::organizedRoot},
      {"archive_root", nullptr, &P::archiveRoot},
      {"processed_root", nullptr, &P::processedRoot},
      {"stats_root", nullptr, &P::statsRoot},
      {"report_root", nullptr, &P::reportRoot},
      {"terrain_root", nullptr, &P::terrainRoot},
      {"registry_root", nullptr, &P::registryRoot},
      {"polygon", &PipelineConfig::polygon, nullptr},
      {"land", &PipelineConfig::land, nullptr},
      {"airspace", &PipelineConfig::airspace, nullptr},
      {"bins", &PipelineConfig::bins, nullptr},
  };
  return keys;
}

std::string resolve(std::string_view value, const fs::path& base) {
  if (value.empty()) return {};
  fs::path p(value);
  if (p.is_relative()) p = base / p;
  return fs::weakly_canonical(fs::absolute(p)).string();
}

[[noreturn]] void bad(const std::string& where, const std::string& why) {
  throw Error(ErrorKind::Config, where + ": " + why);
}

double number(std::string_view v, const std::string& where) {
  auto d = text::parse_double(v);
  if (!d) bad(where, "expected a number, got '" + std::string(v) + "'");
  return *d;
}

long long integer(std::string_view v, const std::string& where) {
  auto d = text::parse_int(v);
  if (!d) bad(where, "expected an integer, got '" + std::string(v) + "'");
  return *d;
}

bool boolean(std::string_view v, const std::string& where) {
  auto b = text::parse_bool(v);
  if (!b) bad(where, "expected true or false, got '" + std::string(v) + "'");
  return *b;
}

void apply(PipelineConfig& c, std::string_view key, std::string_view value, const fs::path& base,
           const std::string& where, std::set<fs::path>& visiting);

void parse_into(PipelineConfig& c, std::string_view body, const fs::path& base, const std::string& origin,
                std::set<fs::path>& visiting) {
  text::LineReader lines(body);
  std::string_view line;
  std::size_t n = 0;
  while (lines.next(line)) {
    ++n;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    std::string where = origin + ":" + std::to_string(n);
    if (eq == std::string_view::npos) bad(where, "expected key = value");
    apply(c, text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)), base, where, visiting);
  }
}

void apply(PipelineConfig& c, std::string_view key, std::string_view value, const fs::path& base,
           const std::string& where, std::set<fs::path>& visiting) {
  for (const auto& pk : path_keys()) {
    if (key == pk.key) {
      pk.ref(c) = resolve(value, base);
      return;
    }
  }
  if (key == "include") {
    fs::path inc = resolve(value, base);
    if (!visiting.insert(inc).second) bad(where, "include cycle through " + inc.string());
    std::string body;
    try {
      body = text::read_file(inc);
    } catch (const Error& e) {
      bad(where, e.what());
    }
    parse_into(c, body, inc.parent_path(), inc.string(), visiting);
    visiting.erase(inc);
  } else if (key == "years") {
    c.years.clear();
    for (const auto& y : text::split_record(value, ',')) c.years.push_back(static_cast<int>(integer(text::trim(y), where)));
    std::sort(c.years.begin(), c.years.end());
    c.years.erase(std::unique(c.years.begin(), c.years.end()), c.years.end());
  } else if (key == "fetch_url") {
    c.fetchUrl = value;
  } else if (key == "workers") {
    c.workers = static_cast<int>(integer(value, where));
  } else if (key == "strategy") {
    auto s = parse_strategy(value);
    if (!s) bad(where, "unknown strategy '" + std::string(value) + "'");
    c.strategy = *s;
  } else if (key == "distribution") {
    auto m = parse_distribution_mode(value);
    if (!m) bad(where, "unknown distribution mode '" + std::string(value) + "'");
    c.distribution = *m;
  } else if (key == "plots") {
    c.plots = boolean(value, where);
  } else if (key == "compression_level") {
    c.compressionLevel = static_cast<int>(integer(value, where));
  } else if (key == "mad_threshold") {
    c.tracks.madThreshold = number(value, where);
  } else if (key == "mad_zero_floor_ft") {
    c.tracks.madZeroFloorFt = number(value, where);
  } else if (key == "smooth_window") {
    c.tracks.smoothWindow = number(value, where);
  } else if (key == "smooth_sigma") {
    c.tracks.smoothSigma = number(value, where);
  } else if (key == "smooth_altitude") {
    c.tracks.smoothAltitude = boolean(value, where);
  } else if (key == "smooth_speed") {
    c.tracks.smoothSpeed = boolean(value, where);
  } else if (key == "max_gap") {
    c.tracks.maxGap = number(value, where);
  } else if (key == "min_points") {
    auto v = integer(value, where);
    if (v < 0) bad(where, "min_points must not be negative");
    c.tracks.minPoints = static_cast<std::size_t>(v);
  } else if (key.starts_with("speed_ceiling.")) {
    auto cls = parse_class(key.substr(14));
    if (!cls) bad(where, "unknown aircraft class in '" + std::string(key) + "'");
    c.tracks.set_ceiling(*cls, number(value, where));
  } else {
    bad(where, "unknown setting '" + std::string(key) + "'");
  }
}

}  // namespace

PipelineConfig PipelineConfig::parse(std::string_view body, const fs::path& baseDir) {
  PipelineConfig c;
  std::set<fs::path> visiting;
  parse_into(c, body, fs::absolute(baseDir), "config", visiting);
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& file) {
  std::string body;
  try {
    body = text::read_file(file);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  PipelineConfig c;
  std::set<fs::path> visiting{fs::weakly_canonical(fs::absolute(file))};
  parse_into(c, body, fs::absolute(file).parent_path(), file.string(), visiting);
  return c;
}

void PipelineConfig::apply_env() {
  for (const auto& pk : path_keys()) {
    std::string name = "SKYTRACK_";
    for (char ch : pk.key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (const char* v = std::getenv(name.c_str()); v && *v) pk.ref(*this) = resolve(v, fs::current_path());
  }
}

void PipelineConfig::validate(bool requireRoots) const {
  if (years.empty()) throw Error(ErrorKind::Config, "years must list at least one year");
  if (workers < 1) throw Error(ErrorKind::Config, "workers must be at least 1");
  if (compressionLevel < 0 || compressionLevel > 9) throw Error(ErrorKind::Config, "compression_level must be 0..9");
  std::vector<std::pair<std::string_view, std::string>> set;
  for (const auto& pk : path_keys()) {
    const auto& v = pk.ref(*this);
    if (pk.file) {
      if (!v.empty()) set.emplace_back(pk.key, v);
      continue;
    }
    if (v.empty()) {
      if (requireRoots) throw Error(ErrorKind::Config, std::string(pk.key) + " is not set");
      continue;
    }
    set.emplace_back(pk.key, v);
  }
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = i + 1; j < set.size(); ++j)
      if (set[i].second == set[j].second)
        throw Error(ErrorKind::Config, "path collision: " + std::string(set[i].first) + " and " +
                                           std::string(set[j].first) + " are both " + set[i].second);
  try {
    tracks.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
}

std::string PipelineConfig::serialize() const {
  std::string out;
  auto kv = [&](std::string_view k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  };
  for (const auto& pk : path_keys()) kv(pk.key, pk.ref(*this));
  std::string ys;
  for (int y : years) ys += (ys.empty() ? "" : ",") + std::to_string(y);
  kv("years", ys);
  kv("fetch_url", fetchUrl);
  kv("workers", std::to_string(workers));
  kv("strategy", std::string(to_string(strategy)));
  kv("distribution", distribution == DistributionMode::Presence ? "presence" : "aircraft-share");
  kv("plots", plots ? "true" : "false");
  kv("compression_level", std::to_string(compressionLevel));
  kv("mad_threshold", text::fmt(tracks.madThreshold));
  kv("mad_zero_floor_ft", text::fmt(tracks.madZeroFloorFt));
  kv("smooth_window", text::fmt(tracks.smoothWindow));
  kv("smooth_sigma", text::fmt(tracks.smoothSigma));
  kv("smooth_altitude", tracks.smoothAltitude ? "true" : "false");
  kv("smooth_speed", tracks.smoothSpeed ? "true" : "false");
  kv("max_gap", text::fmt(tracks.maxGap));
  kv("min_points", std::to_string(tracks.minPoints));
  for (auto c : kAllClasses) kv("speed_ceiling." + std::string(class_name(c)), text::fmt(tracks.ceiling(c)));
  return out;
}

}  // namespace skytrack
