#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbi/inference.hpp"
#include "sbi/metrics.hpp"

namespace sbi {

// One sweep: a task, a method (any inference method, or "oracle" for a
// reference-vs-reference control), budgets and seeds.
struct ExperimentConfig {
  std::string task;
  std::string method = "regular";
  std::vector<int> budgets;           // empty = the task's benchmark grid
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  InferenceConfig inference;          // remaining knobs; task/method/budget/seed are filled per run
  std::filesystem::path out;          // JSONL file appended per run; empty = not persisted
  int metric_samples = 2000;          // posterior and reference draws compared by the metrics
  bool loc_disp = true;
};

struct ResultRecord {
  std::string task;
  std::string method;
  int budget = 0;
  std::uint64_t seed = 0;
  double mmd2 = 0.0;
  double c2st = 0.5;
  double ed2 = 0.0;
  std::optional<LocDispReport> loc_disp;
  long simulator_calls = 0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::vector<std::string> diagnostics;

  bool operator==(const ResultRecord&) const;
};

nlohmann::json record_to_json(const ResultRecord& r);
ResultRecord record_from_json(const nlohmann::json& j);
void append_record(const std::filesystem::path& file, const ResultRecord& r);
std::vector<ResultRecord> read_records(const std::filesystem::path& file);

using RecordSink = std::function<void(const ResultRecord&)>;

// Runs every (budget, seed) cell. Failures become records with failed = true.
// Each record is appended to cfg.out (when set) and passed to `sink` as soon as it exists.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg, const RecordSink& sink = {});

// Reads an ExperimentConfig from JSON. "seeds" may be a count or a list.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
// SBI_OUT_ROOT, else ./results.
std::filesystem::path output_root();

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n - 1 denominator); 0 for a single value
  double median = 0.0;
  double iqr = 0.0;  // q0.75 - q0.25
};
SummaryStats summarize(const std::vector<double>& values);

struct MetricComparison {
  SummaryStats baseline;
  SummaryStats candidate;
  // baseline - candidate: positive means the candidate improved
  double mean_reduction = 0.0;
  double sd_reduction = 0.0;
  double median_reduction = 0.0;
  double iqr_reduction = 0.0;
  // fraction of paired seeds where the candidate is strictly smaller (ties count as bad)
  double ratio = 0.0;
};

struct ComparisonSummary {
  std::string task;
  int budget = 0;
  std::string baseline_method;
  std::string candidate_method;
  int pairs = 0;
  int failed_excluded = 0;
  MetricComparison mmd2, c2st, ed2;
  int verdict = 0;         // improved cells among {mean, SD, ratio} x {mmd2, c2st, ed2}
  int verdict_median = 0;  // same with {median, IQR, ratio}
  std::vector<std::string> warnings;
};

// One summary per (task, budget, candidate method) paired with the baseline by seed.
std::vector<ComparisonSummary> aggregate(const std::vector<ResultRecord>& records,
                                         const std::string& baseline_method);

// Across-budget averages per (task, candidate): the layout of the benchmark tables.
struct TableRow {
  std::string problem;  // task display name
  std::string method;
  int budgets = 0;
  double center[3] = {0, 0, 0};  // mean (or median) reduction: MMD, C2ST, ED
  double spread[3] = {0, 0, 0};  // SD (or IQR) reduction
  double ratio[3] = {0, 0, 0};   // good:bad ratio
};
std::vector<TableRow> across_budget_table(const std::vector<ComparisonSummary>& summaries,
                                          bool median_variant);

std::string format_number(double v);  // %.4g
std::string table_csv(const std::vector<TableRow>& rows, bool median_variant);
std::string summaries_csv(const std::vector<ComparisonSummary>& summaries);
nlohmann::json aggregate_json(const std::vector<ComparisonSummary>& summaries);

}  // namespace sbi
