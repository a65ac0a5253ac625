// Acceptance checks: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "sbi/harness.hpp"
#include "sbi/inference.hpp"
#include "sbi/metrics.hpp"
#include "sbi/nn_core.hpp"
#include "sbi/support_points.hpp"
#include "sbi/tasks.hpp"

using namespace sbi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median_of(std::vector<double> v) {
  return quantile(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())), 0.5);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

SampleMatrix normal_sample(int n, int d, double mean, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(mean, 1.0);
  SampleMatrix s(n, d);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = normal(rng);
  return s;
}

// Median C2ST of regular SNPE per budget against targets, tolerance 0.08.
Outcome budget_curve(const std::string& task, const std::vector<int>& budgets,
                     const std::vector<double>& targets) {
  ExperimentConfig cfg;
  cfg.task = task;
  cfg.method = "regular";
  cfg.budgets = budgets;
  cfg.seeds = {0, 1, 2, 3, 4};
  const auto t0 = Clock::now();
  const auto records = run_experiment(cfg);
  const double elapsed = seconds_since(t0);
  Outcome o{true, ""};
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    std::vector<double> c;
    for (const auto& r : records)
      if (r.budget == budgets[b] && !r.failed) c.push_back(r.c2st);
    const double med = c.size() == cfg.seeds.size() ? median_of(c) : std::nan("");
    const bool ok = std::abs(med - targets[b]) <= 0.08;
    o.pass = o.pass && ok;
    o.detail += "budget " + std::to_string(budgets[b]) + " median " + fmt("%.3f", med) + " (target " +
                fmt("%.2f", targets[b]) + "+-0.08) ";
  }
  o.detail += "runtime " + fmt("%.0f", elapsed) + "s";
  if (task == "gmm1d") o.pass = o.pass && elapsed <= 1800.0;
  return o;
}

Outcome criterion1() { return budget_curve("gmm1d", {100, 500, 2000}, {0.71, 0.55, 0.52}); }

Outcome criterion2() { return budget_curve("two_moons", {100, 2000}, {0.92, 0.59}); }

Outcome criterion3() {
  Outcome o{false, ""};
  for (const char* task : {"two_moons", "bayes_lr"}) {
    const auto t = make_task(task);
    std::vector<int> budgets;
    for (int b : t->budgets())
      if (b <= 1000) budgets.push_back(b);
    std::vector<ResultRecord> records;
    for (const char* method : {"regular", "surrogate"}) {
      ExperimentConfig cfg;
      cfg.task = task;
      cfg.method = method;
      cfg.budgets = budgets;
      cfg.seeds.clear();
      for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
      cfg.loc_disp = false;
      const auto r = run_experiment(cfg);
      records.insert(records.end(), r.begin(), r.end());
    }
    const auto rows = across_budget_table(aggregate(records, "regular"), false);
    if (rows.size() != 1) {
      o.detail += std::string(task) + ": no comparison ";
      continue;
    }
    const double reduction = rows[0].center[1];
    const double ratio = rows[0].ratio[1];
    const bool ok = reduction >= 0.0 && ratio > 0.5;
    o.pass = o.pass || ok;
    o.detail += std::string(task) + " c2st mean reduction " + fmt("%+.4f", reduction) + " ratio " +
                fmt("%.2f", ratio) + " over " + std::to_string(rows[0].budgets) + " budgets" +
                (ok ? " [ok] " : " [no] ");
  }
  return o;
}

Outcome criterion4() {
  Outcome o{true, ""};
  long runs = 0, monotone = 0;
  for (const auto& name : task_names()) {
    const auto task = make_task(name);
    int wins = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const SampleMatrix y = task->prior_sample(10000, derive_seed(s, 0x5350));
      SpConfig cfg;
      cfg.n = 100;
      cfg.seed = s;
      cfg.record_objective = true;
      const SpResult r = support_points(y, cfg);
      // ED^2(X, Y) = sp_objective(X, Y) - E|Y - Y'|; the last term is shared by all X.
      double baseline = 0.0;
      const int draws = 20;
      for (int k = 0; k < draws; ++k)
        baseline += sp_objective(random_subsample(y, 100, derive_seed(s, 1000 + k)), y);
      wins += sp_objective(r.points, y) < baseline / draws;
      bool mono = true;
      for (std::size_t i = 1; i < r.objective.size(); ++i) mono = mono && r.objective[i] <= r.objective[i - 1] + 1e-12;
      monotone += mono;
      ++runs;
    }
    o.pass = o.pass && wins >= 18;
    o.detail += name + " " + std::to_string(wins) + "/20 ";
  }
  o.pass = o.pass && monotone == runs;
  o.detail += "monotone " + std::to_string(monotone) + "/" + std::to_string(runs);
  return o;
}

Outcome criterion5() {
  Rng rng(5);
  std::uniform_int_distribution<int> size(1, 40), dim(1, 4);
  bool exact = true, nonneg = true;
  for (int t = 0; t < 1000; ++t) {
    const int d = dim(rng);
    const SampleMatrix a = normal_sample(size(rng) + 1, d, 0.0, derive_seed(t, 1));
    const SampleMatrix b = normal_sample(size(rng), d, 0.3, derive_seed(t, 2));
    if (t < 100) exact = exact && mmd2(a, a) == 0.0 && ed2(a, a) == 0.0;
    nonneg = nonneg && mmd2(a, b) >= 0.0 && ed2(a, b) >= 0.0;
  }
  int in_band = 0;
  for (int t = 0; t < 50; ++t) {
    const double acc = c2st(normal_sample(1000, 1, 0.0, derive_seed(t, 3)), normal_sample(1000, 1, 0.0, derive_seed(t, 4)),
                            static_cast<std::uint64_t>(t));
    in_band += acc >= 0.45 && acc <= 0.55;
  }
  const double shifted = c2st(normal_sample(5000, 1, 0.0, 6), normal_sample(5000, 1, 1.0, 7), 8);
  Outcome o;
  o.pass = exact && nonneg && in_band >= 48 && shifted >= 0.64 && shifted <= 0.74;
  o.detail = std::string("self-distance exact zero ") + (exact ? "yes" : "no") + ", non-negative on 1000 pairs " +
             (nonneg ? "yes" : "no") + ", null c2st in [0.45,0.55] " + std::to_string(in_band) +
             "/50 (need 48), N(0,1) vs N(1,1) c2st " + fmt("%.3f", shifted) + " (need [0.64,0.74])";
  return o;
}

Outcome criterion6() {
  Outcome o{true, ""};
  {
    const TaskAssets& a = task_assets();
    const Mat prec = a.lr_design.transpose() * a.lr_design / 0.01 + Mat::Identity(6, 6);
    const Mat cov = prec.inverse();
    const Vec mean = cov * a.lr_design.transpose() * a.lr_x_obs / 0.01;
    const int n = 50000;
    const SampleMatrix s = make_task("bayes_lr")->reference_posterior_sample(n, 61);
    const Vec m = s.colwise().mean().transpose();
    const SampleMatrix c0 = s.rowwise() - s.colwise().mean();
    const Mat c = c0.transpose() * c0 / (n - 1.0);
    double worst = 0.0;
    for (int i = 0; i < 6; ++i) {
      worst = std::max(worst, std::abs(m(i) - mean(i)) / std::sqrt(cov(i, i) / n));
      for (int j = 0; j < 6; ++j)
        worst = std::max(worst, std::abs(c(i, j) - cov(i, j)) /
                                    std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / n));
    }
    const bool ok = worst < 3.0;
    o.pass = o.pass && ok;
    o.detail += "LR moments worst " + fmt("%.2f", worst) + " SE; ";
  }
  {
    const SampleMatrix s = make_task("two_moons")->reference_posterior_sample(20000, 62);
    const double pos = ((s.col(0) + s.col(1)).array() > 0.0).cast<double>().mean();
    const bool ok = std::abs(pos - 0.5) <= 0.05;
    o.pass = o.pass && ok;
    o.detail += "two moons positive branch " + fmt("%.3f", pos) + "; ";
  }
  {
    ReferenceDiagnostics diag;
    make_task("bernoulli_glm")->reference_posterior_sample(2000, 63, &diag);
    const double rhat = diag.split_rhat.maxCoeff();
    o.pass = o.pass && rhat < 1.05;
    o.detail += "GLM split R-hat " + fmt("%.4f", rhat) + "; ref-vs-ref c2st";
  }
  for (const auto& name : task_names()) {
    const auto task = make_task(name);
    const double acc = c2st(task->reference_posterior_sample(2000, 64), task->reference_posterior_sample(2000, 65), 66);
    o.pass = o.pass && acc >= 0.45 && acc <= 0.55;
    o.detail += " " + name + " " + fmt("%.3f", acc);
  }
  return o;
}

// Largest relative disagreement between backward() and central differences,
// skipping coordinates whose perturbation moves a ReLU pre-activation across 0.
Outcome criterion7() {
  const auto t0 = Clock::now();
  Rng rng(7);
  std::uniform_int_distribution<int> depth(1, 4), width(1, 12);
  std::normal_distribution<double> normal(0.0, 1.0);
  long checked = 0, bad = 0;
  const double h = 1e-6;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> dims(static_cast<std::size_t>(depth(rng) + 1));
    for (auto& d : dims) d = width(rng);
    const Activation act = trial % 2 ? Activation::Tanh : Activation::ReLU;
    Mlp net = make_mlp(dims, act, static_cast<std::uint64_t>(trial));
    for (auto& b : net.params.biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.1 * normal(rng);
    Vec x(dims.front()), u(dims.back());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
    const Parameters g = backward(net, x, u);
    const auto pattern = [&](const Mlp& m) {
      // signs of all hidden pre-activations
      std::vector<bool> signs;
      Vec a = x;
      for (std::size_t l = 0; l + 1 < m.num_layers(); ++l) {
        const Vec z = m.params.weights[l] * a + m.params.biases[l];
        for (Eigen::Index i = 0; i < z.size(); ++i) signs.push_back(z(i) > 0.0);
        a = act == Activation::ReLU ? Vec(z.cwiseMax(0.0)) : Vec(z.array().tanh().matrix());
      }
      return signs;
    };
    const auto base_pattern = pattern(net);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      for (int is_bias = 0; is_bias < 2; ++is_bias) {
        Mat& w = net.params.weights[l];
        Vec& b = net.params.biases[l];
        const Eigen::Index count = is_bias ? b.size() : w.size();
        for (Eigen::Index k = 0; k < count; ++k) {
          double& p = is_bias ? b(k) : w.data()[k];
          const double an = is_bias ? g.biases[l](k) : g.weights[l].data()[k];
          const double saved = p;
          p = saved + h;
          const double up = u.dot(forward(net, x));
          const bool kink_up = act == Activation::ReLU && pattern(net) != base_pattern;
          p = saved - h;
          const double down = u.dot(forward(net, x));
          const bool kink_down = act == Activation::ReLU && pattern(net) != base_pattern;
          p = saved;
          if (kink_up || kink_down) continue;
          const double fd = (up - down) / (2 * h);
          ++checked;
          bad += std::abs(fd - an) > 1e-4 * std::max({std::abs(fd), std::abs(an), 1e-4});
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = bad == 0 && checked > 0 && elapsed < 60.0;
  o.detail = std::to_string(checked) + " coordinates over 300 random architectures, " + std::to_string(bad) +
             " beyond 1e-4 relative, " + fmt("%.1f", elapsed) + "s";
  return o;
}

Outcome criterion8() {
  long cases = 0, honest = 0;
  std::string failures;
  for (const auto& task : task_names()) {
    for (const auto& method : method_names()) {
      for (int rounds : {1, 2, 3}) {
        for (int budget : {60, 101}) {
          InferenceConfig cfg;
          cfg.task = task;
          cfg.method = parse_method(method);
          cfg.budget = budget;
          cfg.rounds = rounds;
          cfg.seed = static_cast<std::uint64_t>(budget + rounds);
          cfg.n_post = 200;
          cfg.surrogate_multiplier = 2;
          cfg.train.max_epochs = 20;
          cfg.mh.steps = 400;
          cfg.mh.burn_in = 200;
          ++cases;
          try {
            const PosteriorResult r = run_inference(cfg);
            if (r.simulator_calls == budget) ++honest;
            else failures += " " + task + "/" + method + "/r" + std::to_string(rounds) + "/b" + std::to_string(budget) +
                             "=" + std::to_string(r.simulator_calls);
          } catch (const std::exception& e) {
            failures += " " + task + "/" + method + "/r" + std::to_string(rounds) + ": " + e.what();
          }
        }
      }
    }
  }
  Outcome o;
  o.pass = honest == cases;
  o.detail = std::to_string(honest) + "/" + std::to_string(cases) + " runs spent exactly their budget" + failures;
  return o;
}

ResultRecord synthetic(const std::string& task, const std::string& method, int budget, std::uint64_t seed,
                       double mmd, double c2, double ed) {
  ResultRecord r;
  r.task = task;
  r.method = method;
  r.budget = budget;
  r.seed = seed;
  r.mmd2 = mmd;
  r.c2st = c2;
  r.ed2 = ed;
  return r;
}

Outcome criterion9() {
  // Two tasks, two budgets, one candidate; c2st values per seed chosen for hand arithmetic.
  // baseline {0.70, 0.80, 0.60, 0.90}: mean 0.75, SD sqrt(0.05/3), median 0.75, IQR 0.15
  // candidate {0.65, 0.85, 0.55, 0.90}: mean 0.7375, SD sqrt(0.081875/3), median 0.75, IQR 0.2375
  const double base[4] = {0.70, 0.80, 0.60, 0.90};
  const double cand[4] = {0.65, 0.85, 0.55, 0.90};
  std::vector<ResultRecord> recs;
  for (const char* task : {"gmm1d", "two_moons"})
    for (int budget : {100, 200})
      for (std::uint64_t s = 0; s < 4; ++s) {
        // mmd and ed: candidate uniformly 0.01 better
        recs.push_back(synthetic(task, "regular", budget, s, base[s], base[s], 2 * base[s]));
        recs.push_back(synthetic(task, "sp", budget, s, base[s] - 0.01, cand[s], 2 * base[s] - 0.01));
      }
  const auto summaries = aggregate(recs, "regular");
  bool ok = summaries.size() == 4;
  const double sd_b = std::sqrt(0.05 / 3.0), sd_c = std::sqrt(0.081875 / 3.0);
  const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  for (const auto& s : summaries) {
    ok = ok && near(s.c2st.mean_reduction, 0.0125) && near(s.c2st.sd_reduction, sd_b - sd_c) &&
         near(s.c2st.median_reduction, 0.0) && near(s.c2st.iqr_reduction, 0.15 - 0.2375) && s.c2st.ratio == 0.5;
    ok = ok && near(s.mmd2.mean_reduction, 0.01) && near(s.ed2.mean_reduction, 0.01) && s.mmd2.ratio == 1.0 &&
         s.ed2.ratio == 1.0 && near(s.ed2.sd_reduction, 0.0);
    // improved cells: mmd mean+ratio, c2st mean, ed mean+ratio; median variant: mmd and ed median+ratio
    ok = ok && s.verdict == 5 && s.verdict_median == 4;
  }
  const std::string csv = table_csv(across_budget_table(summaries, false), false);
  const std::string expected =
      "problem,method,mean_reduction_mmd,mean_reduction_c2st,mean_reduction_ed,sd_reduction_mmd,"
      "sd_reduction_c2st,sd_reduction_ed,good_bad_ratio_mmd,good_bad_ratio_c2st,good_bad_ratio_ed\n"
      "1D GMM,sp,0.01,0.0125," +
      format_number(0.01) + ",";
  const bool layout = csv.rfind(expected, 0) == 0 && csv.find("\n2 Moons,sp,0.01,0.0125,0.01,") != std::string::npos;
  const std::string median_csv = table_csv(across_budget_table(summaries, true), true);
  const bool median_layout = median_csv.rfind("problem,method,median_reduction_mmd", 0) == 0 &&
                             median_csv.find(",iqr_reduction_c2st,") != std::string::npos;
  Outcome o;
  o.pass = ok && layout && median_layout;
  o.detail = std::string("hand-computed reductions/ratios/verdicts ") + (ok ? "match" : "MISMATCH") +
             ", mean/SD table layout " + (layout ? "ok" : "wrong") + ", median/IQR layout " +
             (median_layout ? "ok" : "wrong");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"budget curve, 1D GMM", criterion1},
      {"budget curve, Two Moons", criterion2},
      {"surrogate benefit at desk scale", criterion3},
      {"support-points representativeness", criterion4},
      {"metric identities", criterion5},
      {"ground-truth oracles", criterion6},
      {"gradient correctness", criterion7},
      {"budget honesty", criterion8},
      {"aggregation fidelity", criterion9},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d (%s): %s  %s  [%.0fs]\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
