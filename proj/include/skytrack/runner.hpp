#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skytrack {

enum class Stage : std::uint8_t { Organize, Pack, Process };
std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

enum class Strategy : std::uint8_t { StaticUniform, DynamicQueue, SizeSortedDynamic };
std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view s);

enum class Outcome : std::uint8_t { Ok, Skipped, Failed };
std::string_view to_string(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view s);

/// Stage-specific named counters, e.g. rawCount or filesWritten.
using Counts = std::map<std::string, std::int64_t>;

struct TaskSpec {
  Stage stage = Stage::Organize;
  std::string inputRef;
  std::optional<std::uint64_t> sizeHint;
};

struct TaskResult {
  TaskSpec spec;
  double elapsed = 0;  // s
  Counts counts;
  Outcome outcome = Outcome::Ok;
  std::string error;
};

struct TaskReport {
  Outcome outcome = Outcome::Ok;
  Counts counts;
};
using TaskBody = std::function<TaskReport(const TaskSpec&)>;

/// One task per input, sorted by inputRef. Throws Error(Input) on a repeated
/// inputRef.
std::vector<TaskSpec> plan(Stage stage, std::vector<std::pair<std::string, std::optional<std::uint64_t>>> inputs);

/// Runs every task exactly once on `workers` threads. A task that throws is
/// reported as failed; its siblings still run. Results come back in plan order.
std::vector<TaskResult> execute(std::span<const TaskSpec> tasks, int workers, Strategy strategy, const TaskBody& body);

/// Makespan of the given durations under `strategy` on an idealized pool.
/// Uses the durations themselves as size hints for size-sorted-dynamic.
double simulate_makespan(std::span<const double> durations, int workers, Strategy strategy);

struct RunSummary {
  std::size_t tasks = 0, ok = 0, skipped = 0, failed = 0;
  double mean = 0, median = 0, min = 0, max = 0;
  Counts totals;
};
RunSummary summarize(std::span<const TaskResult> results);

std::string format_report_table(std::span<const TaskResult> results, const RunSummary& summary);

/// Tab-separated, one row per task: stage, inputRef, elapsed, outcome,
/// counts as k=v;k=v, error.
std::string format_report_tsv(std::span<const TaskResult> results);
std::vector<TaskResult> parse_report_tsv(std::string_view text);

/// Specs of the failed tasks in a report, for an explicit rerun.
std::vector<TaskSpec> failed_tasks(std::span<const TaskResult> results);

}  // namespace skytrack
