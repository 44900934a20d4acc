#include "skytrack/runner.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <queue>

#include "skytrack/error.hpp"
#include "skytrack/textio.hpp"

namespace skytrack {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Organize: return "organize";
    case Stage::Pack: return "pack";
    case Stage::Process: return "process";
  }
  return "organize";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (auto st : {Stage::Organize, Stage::Pack, Stage::Process})
    if (s == to_string(st)) return st;
  return std::nullopt;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::StaticUniform: return "static-uniform";
    case Strategy::DynamicQueue: return "dynamic-queue";
    case Strategy::SizeSortedDynamic: return "size-sorted-dynamic";
  }
  return "dynamic-queue";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  for (auto st : {Strategy::StaticUniform, Strategy::DynamicQueue, Strategy::SizeSortedDynamic})
    if (s == to_string(st)) return st;
  return std::nullopt;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Ok: return "ok";
    case Outcome::Skipped: return "skipped";
    case Outcome::Failed: return "failed";
  }
  return "failed";
}

std::optional<Outcome> parse_outcome(std::string_view s) {
  for (auto o : {Outcome::Ok, Outcome::Skipped, Outcome::Failed})
    if (s == to_string(o)) return o;
  return std::nullopt;
}

std::vector<TaskSpec> plan(Stage stage, std::vector<std::pair<std::string, std::optional<std::uint64_t>>> inputs) {
  std::sort(inputs.begin(), inputs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<TaskSpec> out;
  out.reserve(inputs.size());
  for (auto& [ref, hint] : inputs) {
    if (!out.empty() && out.back().inputRef == ref) throw Error(ErrorKind::Input, "duplicate task input " + ref);
    out.push_back({stage, std::move(ref), hint});
  }
  return out;
}

namespace {

TaskResult run_one(const TaskSpec& spec, const TaskBody& body) {
  TaskResult r;
  r.spec = spec;
  auto t0 = std::chrono::steady_clock::now();
  try {
    auto rep = body(spec);
    r.outcome = rep.outcome;
    r.counts = std::move(rep.counts);
  } catch (const std::exception& e) {
    r.outcome = Outcome::Failed;
    r.error = e.what();
  } catch (...) {
    r.outcome = Outcome::Failed;
    r.error = "unknown exception";
  }
  r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

std::vector<TaskResult> execute(std::span<const TaskSpec> tasks, int workers, Strategy strategy, const TaskBody& body) {
  if (workers < 1) throw Error(ErrorKind::Usage, "workers must be at least 1");
  const auto n = static_cast<std::ptrdiff_t>(tasks.size());
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (strategy == Strategy::SizeSortedDynamic) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return tasks[a].sizeHint.value_or(0) > tasks[b].sizeHint.value_or(0);
    });
  }

  std::vector<TaskResult> results(tasks.size());
  if (strategy == Strategy::StaticUniform) {
#pragma omp parallel for num_threads(workers) schedule(static, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) results[order[i]] = run_one(tasks[order[i]], body);
  } else {
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) results[order[i]] = run_one(tasks[order[i]], body);
  }
  return results;
}

double simulate_makespan(std::span<const double> durations, int workers, Strategy strategy) {
  if (workers < 1) throw Error(ErrorKind::Usage, "workers must be at least 1");
  std::vector<double> load(static_cast<std::size_t>(workers), 0.0);
  if (strategy == Strategy::StaticUniform) {
    for (std::size_t i = 0; i < durations.size(); ++i) load[i % load.size()] += durations[i];
    return *std::max_element(load.begin(), load.end());
  }
  std::vector<double> d(durations.begin(), durations.end());
  if (strategy == Strategy::SizeSortedDynamic) std::stable_sort(d.begin(), d.end(), std::greater<>());
  for (double x : d) {
    // earliest-free worker, lowest index on ties
    auto it = std::min_element(load.begin(), load.end());
    *it += x;
  }
  return *std::max_element(load.begin(), load.end());
}

RunSummary summarize(std::span<const TaskResult> results) {
  RunSummary s;
  s.tasks = results.size();
  if (results.empty()) return s;
  std::vector<double> el;
  el.reserve(results.size());
  for (const auto& r : results) {
    el.push_back(r.elapsed);
    switch (r.outcome) {
      case Outcome::Ok: ++s.ok; break;
      case Outcome::Skipped: ++s.skipped; break;
      case Outcome::Failed: ++s.failed; break;
    }
    for (const auto& [k, v] : r.counts) s.totals[k] += v;
  }
  std::sort(el.begin(), el.end());
  s.min = el.front();
  s.max = el.back();
  s.mean = std::accumulate(el.begin(), el.end(), 0.0) / static_cast<double>(el.size());
  const std::size_t mid = el.size() / 2;
  s.median = el.size() % 2 ? el[mid] : (el[mid - 1] + el[mid]) / 2.0;
  return s;
}

std::string format_report_table(std::span<const TaskResult> results, const RunSummary& summary) {
  std::size_t refWidth = 8;
  for (const auto& r : results) refWidth = std::max(refWidth, r.spec.inputRef.size());
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-9s %-*s %10s %-8s %s\n", "stage", static_cast<int>(refWidth), "input",
                "elapsed_s", "outcome", "detail");
  out += buf;
  for (const auto& r : results) {
    std::string detail = r.error;
    if (detail.empty())
      for (const auto& [k, v] : r.counts) detail += k + "=" + std::to_string(v) + " ";
    std::snprintf(buf, sizeof buf, "%-9s %-*s %10.3f %-8s ", std::string(to_string(r.spec.stage)).c_str(),
                  static_cast<int>(refWidth), r.spec.inputRef.c_str(), r.elapsed,
                  std::string(to_string(r.outcome)).c_str());
    out += buf;
    out += detail;
    out += '\n';
  }
  std::snprintf(buf, sizeof buf,
                "\n%zu tasks: %zu ok, %zu skipped, %zu failed\n"
                "elapsed s: mean %.3f  median %.3f  min %.3f  max %.3f\n",
                summary.tasks, summary.ok, summary.skipped, summary.failed, summary.mean, summary.median,
                summary.min, summary.max);
  out += buf;
  for (const auto& [k, v] : summary.totals) out += "  " + k + " = " + std::to_string(v) + "\n";
  return out;
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    else if (c == '"') c = '\'';
  return s;
}

}  // namespace

std::string format_report_tsv(std::span<const TaskResult> results) {
  std::string out = "stage\tinput\telapsed_s\toutcome\tcounts\terror\n";
  for (const auto& r : results) {
    out += to_string(r.spec.stage);
    out += '\t' + sanitize(r.spec.inputRef);
    out += '\t' + text::fmt_fixed(r.elapsed, 6);
    out += '\t';
    out += to_string(r.outcome);
    out += '\t';
    bool first = true;
    for (const auto& [k, v] : r.counts) {
      if (!first) out += ';';
      first = false;
      out += k + "=" + std::to_string(v);
    }
    out += '\t' + sanitize(r.error);
    if (r.spec.sizeHint) out += "\tsize=" + std::to_string(*r.spec.sizeHint);
    out += '\n';
  }
  return out;
}

std::vector<TaskResult> parse_report_tsv(std::string_view body) {
  std::vector<TaskResult> out;
  text::LineReader lines(body);
  std::string_view line;
  if (!lines.next(line)) return out;
  if (!line.starts_with("stage\t")) throw Error(ErrorKind::Input, "not a run report");
  std::size_t lineNo = 1;
  while (lines.next(line)) {
    ++lineNo;
    if (text::trim(line).empty()) continue;
    auto f = text::split_record(line, '\t');
    auto bad = [&] { return Error(ErrorKind::Input, "run report line " + std::to_string(lineNo) + " is malformed"); };
    if (f.size() < 6) throw bad();
    TaskResult r;
    auto st = parse_stage(f[0]);
    auto el = text::parse_double(f[2]);
    auto oc = parse_outcome(f[3]);
    if (!st || !el || !oc) throw bad();
    r.spec.stage = *st;
    r.spec.inputRef = f[1];
    r.elapsed = *el;
    r.outcome = *oc;
    std::string_view counts = f[4];
    while (!counts.empty()) {
      auto semi = counts.find(';');
      auto kv = counts.substr(0, semi);
      auto eq = kv.find('=');
      if (eq == std::string_view::npos) throw bad();
      auto v = text::parse_int(kv.substr(eq + 1));
      if (!v) throw bad();
      r.counts[std::string(kv.substr(0, eq))] = *v;
      counts = semi == std::string_view::npos ? std::string_view{} : counts.substr(semi + 1);
    }
    r.error = f[5];
    if (f.size() > 6 && std::string_view(f[6]).starts_with("size=")) {
      auto v = text::parse_int(std::string_view(f[6]).substr(5));
      if (v && *v >= 0) r.spec.sizeHint = static_cast<std::uint64_t>(*v);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TaskSpec> failed_tasks(std::span<const TaskResult> results) {
  std::vector<TaskSpec> out;
  for (const auto& r : results)
    if (r.outcome == Outcome::Failed) out.push_back(r.spec);
  return out;
}

}  // namespace skytrack
