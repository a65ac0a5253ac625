#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sbi/csv.hpp"
#include "sbi/harness.hpp"
#include "sbi/metrics.hpp"
#include "sbi/support_points.hpp"
#include "sbi/tasks.hpp"

namespace {

// Failure report on stderr: one JSON object per line.
int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

struct RunOptions {
  std::string config;
  std::string task;
  std::string method = "regular";
  std::vector<int> budgets;
  int seeds = -1;
  int rounds = -1;
  int surrogate_mult = -1;
  int sp_oversample = -1;
  int atoms = -1;
  int n_post = -1;
  int metric_samples = -1;
  std::string out;
};

int cmd_run(const RunOptions& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw sbi::Error("cannot open config " + o.config);
    j = nlohmann::json::parse(in);
  }
  if (!o.task.empty()) j["task"] = o.task;
  if (!j.contains("task")) throw std::invalid_argument("--task (or a config file with \"task\") is required");
  if (!j.contains("method") || o.method != "regular") j["method"] = o.method;
  if (!o.budgets.empty()) j["budgets"] = o.budgets;
  if (o.seeds > 0) j["seeds"] = o.seeds;
  if (o.rounds > 0) j["rounds"] = o.rounds;
  if (o.surrogate_mult > 0) j["surrogate_multiplier"] = o.surrogate_mult;
  if (o.sp_oversample > 0) j["sp_oversample"] = o.sp_oversample;
  if (o.atoms > 0) j["atoms"] = o.atoms;
  if (o.n_post > 0) j["n_post"] = o.n_post;
  if (o.metric_samples > 0) j["metric_samples"] = o.metric_samples;
  if (!o.out.empty()) j["out"] = o.out;

  sbi::ExperimentConfig cfg = sbi::experiment_from_json(j);
  if (cfg.out.empty()) cfg.out = sbi::output_root() / (cfg.task + "-" + cfg.method + ".jsonl");
  sbi::make_task(cfg.task);  // validates the name before any work
  if (cfg.method != "oracle") sbi::parse_method(cfg.method);

  int failed = 0;
  sbi::run_experiment(cfg, [&](const sbi::ResultRecord& r) {
    failed += r.failed;
    std::cout << sbi::record_to_json(r).dump() << std::endl;
  });
  std::cerr << "records appended to " << cfg.out.string() << '\n';
  return failed ? 3 : 0;
}

int cmd_aggregate(const std::vector<std::string>& inputs, const std::string& baseline,
                  const std::string& format, const std::string& view) {
  std::vector<sbi::ResultRecord> records;
  for (const auto& path : inputs) {
    auto r = sbi::read_records(path);
    records.insert(records.end(), r.begin(), r.end());
  }
  const auto summaries = sbi::aggregate(records, baseline);
  for (const auto& s : summaries)
    for (const auto& w : s.warnings)
      std::cerr << s.task << " budget " << s.budget << " " << s.candidate_method << ": " << w << '\n';
  if (format == "json") {
    std::cout << sbi::aggregate_json(summaries).dump(2) << '\n';
  } else if (view == "summaries") {
    std::cout << sbi::summaries_csv(summaries);
  } else {
    const bool median = view == "median-iqr";
    std::cout << sbi::table_csv(sbi::across_budget_table(summaries, median), median);
  }
  return 0;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path, std::uint64_t seed) {
  const sbi::SampleMatrix a = sbi::read_csv(a_path);
  const sbi::SampleMatrix b = sbi::read_csv(b_path);
  nlohmann::json j{{"mmd2", sbi::mmd2(a, b)}, {"ed2", sbi::ed2(a, b)}};
  if (a.rows() >= 50 && b.rows() >= 50) j["c2st"] = sbi::c2st(a, b, seed);
  else j["c2st"] = nullptr;
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_sp(const std::string& in, const std::string& out, const sbi::SpConfig& cfg) {
  const sbi::SampleMatrix y = sbi::read_csv(in);
  const sbi::SpResult r = sbi::support_points(y, cfg);
  if (out.empty()) sbi::write_csv(std::cout, r.points);
  else sbi::write_csv(std::filesystem::path(out), r.points);
  std::cerr << nlohmann::json{{"iterations", r.iterations}, {"converged", r.converged},
                              {"max_movement", r.max_movement}}.dump()
            << '\n';
  return 0;
}

int cmd_tasks_list() {
  for (const auto& name : sbi::task_names()) {
    const auto t = sbi::make_task(name);
    std::cout << nlohmann::json{{"name", name},
                                {"display_name", t->display_name()},
                                {"theta_dim", t->theta_dim()},
                                {"x_dim", t->x_dim()},
                                {"budgets", t->budgets()}}.dump()
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential neural posterior estimation toolkit"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run seeded inference experiments and append JSONL records");
  run_cmd->add_option("--config", run.config, "JSON experiment config");
  run_cmd->add_option("--task", run.task, "Task name (see `tasks list`)");
  run_cmd->add_option("--method", run.method, "regular|surrogate|sp|combined|snle|snle_surrogate|oracle");
  run_cmd->add_option("--budget", run.budgets, "Simulator budget(s); default: the task grid")->delimiter(',');
  run_cmd->add_option("--seeds", run.seeds, "Number of seeds (0..N-1)");
  run_cmd->add_option("--rounds", run.rounds, "Inference rounds");
  run_cmd->add_option("--surrogate-mult", run.surrogate_mult, "Surrogate sample multiplier");
  run_cmd->add_option("--sp-oversample", run.sp_oversample, "Support-points oversampling factor");
  run_cmd->add_option("--atoms", run.atoms, "Atoms of the contrastive loss");
  run_cmd->add_option("--n-post", run.n_post, "Posterior sample size");
  run_cmd->add_option("--metric-samples", run.metric_samples, "Draws compared by the metrics");
  run_cmd->add_option("--out", run.out, "JSONL output file (default: $SBI_OUT_ROOT/<task>-<method>.jsonl)");

  std::vector<std::string> agg_in;
  std::string baseline = "regular", format = "csv", view = "mean-sd";
  auto* agg_cmd = app.add_subcommand("aggregate", "Compare methods against a baseline");
  agg_cmd->add_option("--in", agg_in, "JSONL record file(s)")->required();
  agg_cmd->add_option("--baseline", baseline, "Baseline method");
  agg_cmd->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  agg_cmd->add_option("--view", view, "CSV view: mean-sd|median-iqr|summaries")
      ->check(CLI::IsMember({"mean-sd", "median-iqr", "summaries"}));

  std::string a_path, b_path;
  std::uint64_t metric_seed = 0;
  auto* met_cmd = app.add_subcommand("metrics", "MMD^2, C2ST and ED^2 between two CSV samples");
  met_cmd->add_option("a", a_path, "First sample (CSV)")->required();
  met_cmd->add_option("b", b_path, "Second sample (CSV)")->required();
  met_cmd->add_option("--seed", metric_seed, "C2ST seed");

  std::string sp_in, sp_out;
  sbi::SpConfig sp;
  auto* sp_cmd = app.add_subcommand("sp", "Support points of a CSV sample");
  sp_cmd->add_option("--in", sp_in, "Reference sample (CSV)")->required();
  sp_cmd->add_option("--out", sp_out, "Output CSV (default: stdout)");
  sp_cmd->add_option("-n,--n", sp.n, "Number of points")->required();
  sp_cmd->add_option("--tol", sp.tolerance, "Movement tolerance (default: 1e-6 x data range)");
  sp_cmd->add_option("--max-iter", sp.max_iterations, "Iteration cap");
  sp_cmd->add_option("--seed", sp.seed, "Initialization seed");

  auto* tasks_cmd = app.add_subcommand("tasks", "Task registry");
  auto* list_cmd = tasks_cmd->add_subcommand("list", "List registered tasks");
  tasks_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*agg_cmd) return cmd_aggregate(agg_in, baseline, format, view);
    if (*met_cmd) return cmd_metrics(a_path, b_path, metric_seed);
    if (*sp_cmd) return cmd_sp(sp_in, sp_out, sp);
    if (*list_cmd) return cmd_tasks_list();
  } catch (const sbi::UnknownNameError& e) {
    return fail("unknown_name", e.what(), 1);
  } catch (const nlohmann::json::exception& e) {
    return fail("json", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 0;
}
