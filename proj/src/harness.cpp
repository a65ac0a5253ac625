#include "sbi/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace sbi {

namespace {

constexpr std::uint64_t kReferenceSalt = 0x5245'4645'5245'4e43ULL;
constexpr std::uint64_t kOracleSalt = 0x4f52'4143'4c45'0001ULL;
constexpr std::uint64_t kMetricSalt = 0x4d45'5452'4943'0001ULL;

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

bool same_number(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

// Verdict cell: a reduction counts only beyond floating-point round-off; anything
// smaller is a tie, and ties count as no improvement.
bool improves(double baseline, double candidate) {
  return baseline - candidate > 1e-12 * std::max({std::abs(baseline), std::abs(candidate), 1e-300});
}

std::string display_name_of(const std::string& task) {
  try {
    return make_task(task)->display_name();
  } catch (const Error&) {
    return task;
  }
}

}  // namespace

bool ResultRecord::operator==(const ResultRecord& o) const {
  const auto ld_equal = [](const std::optional<LocDispReport>& a, const std::optional<LocDispReport>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    return same_number(a->m1, b->m1) && same_number(a->m2, b->m2) && same_number(a->m3, b->m3) &&
           same_number(a->m4, b->m4);
  };
  return task == o.task && method == o.method && budget == o.budget && seed == o.seed &&
         same_number(mmd2, o.mmd2) && same_number(c2st, o.c2st) && same_number(ed2, o.ed2) &&
         ld_equal(loc_disp, o.loc_disp) && simulator_calls == o.simulator_calls &&
         same_number(wall_seconds, o.wall_seconds) && failed == o.failed &&
         diagnostics == o.diagnostics;
}

nlohmann::json record_to_json(const ResultRecord& r) {
  nlohmann::json j;
  j["task"] = r.task;
  j["method"] = r.method;
  j["budget"] = r.budget;
  j["seed"] = r.seed;
  j["mmd2"] = number_or_null(r.mmd2);
  j["c2st"] = number_or_null(r.c2st);
  j["ed2"] = number_or_null(r.ed2);
  if (r.loc_disp) {
    j["loc_disp"] = {{"m1", number_or_null(r.loc_disp->m1)},
                     {"m2", number_or_null(r.loc_disp->m2)},
                     {"m3", number_or_null(r.loc_disp->m3)},
                     {"m4", number_or_null(r.loc_disp->m4)}};
  } else {
    j["loc_disp"] = nullptr;
  }
  j["simulator_calls"] = r.simulator_calls;
  j["wall_seconds"] = number_or_null(r.wall_seconds);
  j["failed"] = r.failed;
  j["diagnostics"] = r.diagnostics;
  return j;
}

ResultRecord record_from_json(const nlohmann::json& j) {
  ResultRecord r;
  r.task = j.at("task").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.budget = j.at("budget").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.mmd2 = number_from(j.at("mmd2"));
  r.c2st = number_from(j.at("c2st"));
  r.ed2 = number_from(j.at("ed2"));
  if (j.contains("loc_disp") && !j["loc_disp"].is_null()) {
    const auto& l = j["loc_disp"];
    r.loc_disp = LocDispReport{number_from(l.at("m1")), number_from(l.at("m2")),
                               number_from(l.at("m3")), number_from(l.at("m4"))};
  }
  r.simulator_calls = j.value("simulator_calls", 0L);
  r.wall_seconds = j.contains("wall_seconds") ? number_from(j["wall_seconds"]) : 0.0;
  r.failed = j.value("failed", false);
  r.diagnostics = j.value("diagnostics", std::vector<std::string>{});
  return r;
}

void append_record(const std::filesystem::path& file, const ResultRecord& r) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::app);
  if (!out) throw Error("cannot append to " + file.string());
  out << record_to_json(r).dump() << '\n';
  out.flush();
}

std::vector<ResultRecord> read_records(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  std::vector<ResultRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg, const RecordSink& sink) {
  const std::unique_ptr<Task> task = make_task(cfg.task);
  const bool oracle = cfg.method == "oracle";
  const Method method = oracle ? Method::Regular : parse_method(cfg.method);
  std::vector<int> budgets = cfg.budgets.empty() ? task->budgets() : cfg.budgets;
  if (cfg.seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  if (cfg.metric_samples < 50) throw std::invalid_argument("metric_samples must be >= 50");
  for (int b : budgets)
    if (b < 1) throw std::invalid_argument("budgets must be positive");
  std::sort(budgets.begin(), budgets.end());

  std::map<std::uint64_t, SampleMatrix> references;
  const auto reference_for = [&](std::uint64_t seed) -> const SampleMatrix& {
    auto it = references.find(seed);
    if (it == references.end())
      it = references
               .emplace(seed, task->reference_posterior_sample(cfg.metric_samples, derive_seed(seed, kReferenceSalt)))
               .first;
    return it->second;
  };

  std::vector<ResultRecord> records;
  for (int budget : budgets) {
    for (std::uint64_t seed : cfg.seeds) {
      ResultRecord rec;
      rec.task = cfg.task;
      rec.method = cfg.method;
      rec.budget = budget;
      rec.seed = seed;
      try {
        SampleMatrix posterior;
        if (oracle) {
          const auto t0 = std::chrono::steady_clock::now();
          posterior = task->reference_posterior_sample(cfg.metric_samples, derive_seed(seed, kOracleSalt));
          rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } else {
          InferenceConfig ic = cfg.inference;
          ic.task = cfg.task;
          ic.method = method;
          ic.budget = budget;
          ic.seed = seed;
          PosteriorResult pr = run_inference(ic);
          posterior = std::move(pr.samples);
          rec.simulator_calls = pr.simulator_calls;
          rec.wall_seconds = pr.wall_seconds;
          rec.diagnostics = std::move(pr.diagnostics);
        }
        const SampleMatrix& reference = reference_for(seed);
        const Eigen::Index m = std::min<Eigen::Index>(cfg.metric_samples, posterior.rows());
        const SampleMatrix head = posterior.topRows(m);
        const MetricTriple t = metric_triple(head, reference, derive_seed(derive_seed(seed, kMetricSalt), static_cast<std::uint64_t>(budget)));
        rec.mmd2 = t.mmd2;
        rec.c2st = t.c2st;
        rec.ed2 = t.ed2;
        if (cfg.loc_disp) rec.loc_disp = loc_disp(posterior, task->theta_true(), task->prior().ranges());
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.mmd2 = rec.c2st = rec.ed2 = std::numeric_limits<double>::quiet_NaN();
        rec.loc_disp.reset();
        rec.diagnostics.push_back(std::string("run failed: ") + e.what());
      }
      if (!cfg.out.empty()) append_record(cfg.out, rec);
      if (sink) sink(rec);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::filesystem::path output_root() {
  if (const char* env = std::getenv("SBI_OUT_ROOT"); env && *env) return env;
  return "results";
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.task = j.at("task").get<std::string>();
  cfg.method = j.value("method", cfg.method);
  if (j.contains("budgets")) cfg.budgets = j["budgets"].get<std::vector<int>>();
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    if (s.is_number_integer()) {
      const int count = s.get<int>();
      if (count < 1) throw std::invalid_argument("seeds must be >= 1");
      cfg.seeds.clear();
      for (int i = 0; i < count; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
    } else {
      cfg.seeds = s.get<std::vector<std::uint64_t>>();
    }
  }
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  cfg.metric_samples = j.value("metric_samples", cfg.metric_samples);
  cfg.loc_disp = j.value("loc_disp", cfg.loc_disp);
  InferenceConfig& ic = cfg.inference;
  ic.rounds = j.value("rounds", ic.rounds);
  ic.surrogate_multiplier = j.value("surrogate_multiplier", ic.surrogate_multiplier);
  ic.sp_oversample = j.value("sp_oversample", ic.sp_oversample);
  ic.atoms = j.value("atoms", ic.atoms);
  ic.n_post = j.value("n_post", ic.n_post);
  if (j.contains("mdn")) {
    const auto& m = j["mdn"];
    ic.mdn.components = m.value("components", ic.mdn.components);
    ic.mdn.hidden = m.value("hidden", ic.mdn.hidden);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    ic.train.batch_size = t.value("batch_size", ic.train.batch_size);
    ic.train.max_epochs = t.value("max_epochs", ic.train.max_epochs);
    ic.train.patience = t.value("patience", ic.train.patience);
    ic.train.step_size = t.value("step_size", ic.train.step_size);
    ic.train.validation_fraction = t.value("validation_fraction", ic.train.validation_fraction);
  }
  return cfg;
}

SummaryStats summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  const Vec v = Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
  SummaryStats s;
  s.mean = v.mean();
  s.sd = v.size() > 1 ? std::sqrt((v.array() - s.mean).square().sum() / static_cast<double>(v.size() - 1)) : 0.0;
  s.median = quantile(v, 0.5);
  s.iqr = quantile(v, 0.75) - quantile(v, 0.25);
  return s;
}

std::vector<ComparisonSummary> aggregate(const std::vector<ResultRecord>& records,
                                         const std::string& baseline_method) {
  using Key = std::pair<std::string, int>;
  // (task, budget) -> method -> records
  std::map<Key, std::map<std::string, std::vector<const ResultRecord*>>> groups;
  for (const auto& r : records) groups[{r.task, r.budget}][r.method].push_back(&r);

  std::vector<ComparisonSummary> out;
  for (const auto& [key, by_method] : groups) {
    const auto base_it = by_method.find(baseline_method);
    if (base_it == by_method.end()) continue;
    for (const auto& [method, cand] : by_method) {
      if (method == baseline_method) continue;
      ComparisonSummary s;
      s.task = key.first;
      s.budget = key.second;
      s.baseline_method = baseline_method;
      s.candidate_method = method;

      std::vector<const ResultRecord*> base_ok, cand_ok;
      for (const auto* r : base_it->second) {
        if (r->failed) ++s.failed_excluded;
        else base_ok.push_back(r);
      }
      for (const auto* r : cand) {
        if (r->failed) ++s.failed_excluded;
        else cand_ok.push_back(r);
      }
      const auto by_seed = [](const ResultRecord* a, const ResultRecord* b) { return a->seed < b->seed; };
      std::sort(base_ok.begin(), base_ok.end(), by_seed);
      std::sort(cand_ok.begin(), cand_ok.end(), by_seed);

      std::vector<std::pair<const ResultRecord*, const ResultRecord*>> pairs;
      std::map<std::uint64_t, const ResultRecord*> base_by_seed;
      for (const auto* r : base_ok) base_by_seed[r->seed] = r;
      bool all_matched = base_ok.size() == cand_ok.size();
      for (const auto* r : cand_ok) all_matched = all_matched && base_by_seed.count(r->seed);
      if (all_matched) {
        for (const auto* r : cand_ok) pairs.emplace_back(base_by_seed[r->seed], r);
      } else {
        s.warnings.push_back("seeds do not match the baseline; pairing by seed index");
        const std::size_t n = std::min(base_ok.size(), cand_ok.size());
        for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(base_ok[i], cand_ok[i]);
      }
      if (s.failed_excluded) s.warnings.push_back(std::to_string(s.failed_excluded) + " failed runs excluded");
      s.pairs = static_cast<int>(pairs.size());
      if (pairs.empty()) {
        s.warnings.push_back("no paired runs");
        out.push_back(std::move(s));
        continue;
      }

      const auto compare = [&](double ResultRecord::*field) {
        MetricComparison c;
        std::vector<double> b, k;
        int better = 0;
        for (const auto& [pb, pc] : pairs) {
          b.push_back(pb->*field);
          k.push_back(pc->*field);
          better += pc->*field < pb->*field;
        }
        c.baseline = summarize(b);
        c.candidate = summarize(k);
        c.mean_reduction = c.baseline.mean - c.candidate.mean;
        c.sd_reduction = c.baseline.sd - c.candidate.sd;
        c.median_reduction = c.baseline.median - c.candidate.median;
        c.iqr_reduction = c.baseline.iqr - c.candidate.iqr;
        c.ratio = static_cast<double>(better) / static_cast<double>(pairs.size());
        return c;
      };
      s.mmd2 = compare(&ResultRecord::mmd2);
      s.c2st = compare(&ResultRecord::c2st);
      s.ed2 = compare(&ResultRecord::ed2);
      for (const MetricComparison* c : {&s.mmd2, &s.c2st, &s.ed2}) {
        s.verdict += improves(c->baseline.mean, c->candidate.mean) +
                     improves(c->baseline.sd, c->candidate.sd) + (c->ratio > 0.5);
        s.verdict_median += improves(c->baseline.median, c->candidate.median) +
                            improves(c->baseline.iqr, c->candidate.iqr) + (c->ratio > 0.5);
      }
      out.push_back(std::move(s));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ComparisonSummary& a, const ComparisonSummary& b) {
    return std::tie(a.task, a.candidate_method, a.budget) < std::tie(b.task, b.candidate_method, b.budget);
  });
  return out;
}

std::vector<TableRow> across_budget_table(const std::vector<ComparisonSummary>& summaries,
                                          bool median_variant) {
  std::vector<TableRow> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::map<std::pair<std::string, std::string>, std::string> display;
  for (const auto& s : summaries) {
    if (s.pairs == 0) continue;
    const auto key = std::make_pair(s.task, s.candidate_method);
    auto it = index.find(key);
    if (it == index.end()) {
      TableRow row;
      row.problem = display_name_of(s.task);
      row.method = s.candidate_method;
      it = index.emplace(key, rows.size()).first;
      rows.push_back(row);
    }
    TableRow& row = rows[it->second];
    const MetricComparison* cs[3] = {&s.mmd2, &s.c2st, &s.ed2};
    for (int m = 0; m < 3; ++m) {
      row.center[m] += median_variant ? cs[m]->median_reduction : cs[m]->mean_reduction;
      row.spread[m] += median_variant ? cs[m]->iqr_reduction : cs[m]->sd_reduction;
      row.ratio[m] += cs[m]->ratio;
    }
    ++row.budgets;
  }
  for (auto& row : rows) {
    for (int m = 0; m < 3; ++m) {
      row.center[m] /= row.budgets;
      row.spread[m] /= row.budgets;
      row.ratio[m] /= row.budgets;
    }
  }
  return rows;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string table_csv(const std::vector<TableRow>& rows, bool median_variant) {
  const std::string center = median_variant ? "median_reduction" : "mean_reduction";
  const std::string spread = median_variant ? "iqr_reduction" : "sd_reduction";
  std::ostringstream out;
  out << "problem,method";
  for (const auto& group : {center, spread, std::string("good_bad_ratio")})
    for (const char* metric : {"mmd", "c2st", "ed"}) out << ',' << group << '_' << metric;
  out << '\n';
  for (const auto& r : rows) {
    out << r.problem << ',' << r.method;
    for (const double* group : {r.center, r.spread, r.ratio})
      for (int m = 0; m < 3; ++m) out << ',' << format_number(group[m]);
    out << '\n';
  }
  return out.str();
}

std::string summaries_csv(const std::vector<ComparisonSummary>& summaries) {
  std::ostringstream out;
  out << "task,budget,baseline,candidate,pairs,metric,baseline_mean,baseline_sd,baseline_median,"
         "baseline_iqr,candidate_mean,candidate_sd,candidate_median,candidate_iqr,mean_reduction,"
         "sd_reduction,median_reduction,iqr_reduction,good_bad_ratio,verdict,verdict_median\n";
  for (const auto& s : summaries) {
    const std::pair<const char*, const MetricComparison*> metrics[3] = {
        {"mmd", &s.mmd2}, {"c2st", &s.c2st}, {"ed", &s.ed2}};
    for (const auto& [name, c] : metrics) {
      out << s.task << ',' << s.budget << ',' << s.baseline_method << ',' << s.candidate_method << ','
          << s.pairs << ',' << name;
      for (double v : {c->baseline.mean, c->baseline.sd, c->baseline.median, c->baseline.iqr,
                       c->candidate.mean, c->candidate.sd, c->candidate.median, c->candidate.iqr,
                       c->mean_reduction, c->sd_reduction, c->median_reduction, c->iqr_reduction,
                       c->ratio})
        out << ',' << format_number(v);
      out << ',' << s.verdict << ',' << s.verdict_median << '\n';
    }
  }
  return out.str();
}

nlohmann::json aggregate_json(const std::vector<ComparisonSummary>& summaries) {
  const auto stats = [](const SummaryStats& s) {
    return nlohmann::json{{"mean", s.mean}, {"sd", s.sd}, {"median", s.median}, {"iqr", s.iqr}};
  };
  const auto comparison = [&](const MetricComparison& c) {
    return nlohmann::json{{"baseline", stats(c.baseline)},
                          {"candidate", stats(c.candidate)},
                          {"mean_reduction", c.mean_reduction},
                          {"sd_reduction", c.sd_reduction},
                          {"median_reduction", c.median_reduction},
                          {"iqr_reduction", c.iqr_reduction},
                          {"good_bad_ratio", c.ratio}};
  };
  nlohmann::json per_budget = nlohmann::json::array();
  for (const auto& s : summaries) {
    per_budget.push_back({{"task", s.task},
                          {"budget", s.budget},
                          {"baseline", s.baseline_method},
                          {"candidate", s.candidate_method},
                          {"pairs", s.pairs},
                          {"failed_excluded", s.failed_excluded},
                          {"mmd2", comparison(s.mmd2)},
                          {"c2st", comparison(s.c2st)},
                          {"ed2", comparison(s.ed2)},
                          {"verdict", s.verdict},
                          {"verdict_median", s.verdict_median},
                          {"warnings", s.warnings}});
  }
  const auto table = [&](bool median_variant) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : across_budget_table(summaries, median_variant)) {
      const auto triple = [](const double* v) {
        return nlohmann::json{{"mmd", v[0]}, {"c2st", v[1]}, {"ed", v[2]}};
      };
      rows.push_back({{"problem", r.problem},
                      {"method", r.method},
                      {"budgets", r.budgets},
                      {median_variant ? "median_reduction" : "mean_reduction", triple(r.center)},
                      {median_variant ? "iqr_reduction" : "sd_reduction", triple(r.spread)},
                      {"good_bad_ratio", triple(r.ratio)}});
    }
    return rows;
  };
  return {{"summaries", per_budget}, {"mean_sd_table", table(false)}, {"median_iqr_table", table(true)}};
}

}  // namespace sbi
