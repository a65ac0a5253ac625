#include "sbi/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sbi/support_points.hpp"

namespace sbi {

namespace {

// Salts for derive_seed; one per random stream of a run.
enum Salt : std::uint64_t {
  kPriorDraw = 1,
  kSimulate = 2,
  kProposal = 3,
  kSpInit = 4,
  kPosteriorInit = 5,
  kSurrogateInit = 6,
  kPosteriorTrain = 7,
  kSurrogateTrain = 8,
  kSurrogateDraw = 9,
  kFinalDraw = 10,
  kMcmc = 11,
  kMcmcInit = 12,
};

std::uint64_t round_seed(std::uint64_t seed, Salt salt, int round) {
  return derive_seed(derive_seed(seed, salt), static_cast<std::uint64_t>(round));
}

SampleMatrix vstack(const SampleMatrix& a, const SampleMatrix& b) {
  if (a.rows() == 0) return b;
  SampleMatrix out(a.rows() + b.rows(), b.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

void validate(const InferenceConfig& cfg) {
  if (cfg.rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (cfg.budget < 2) throw std::invalid_argument("budget must be >= 2");
  if (cfg.surrogate_multiplier < 1) throw std::invalid_argument("surrogate multiplier must be >= 1");
  if (cfg.sp_oversample < 1) throw std::invalid_argument("sp oversample factor must be >= 1");
  if (cfg.n_post < 1) throw std::invalid_argument("n_post must be >= 1");
  if (cfg.atoms < 2) throw std::invalid_argument("atoms must be >= 2");
}

// Shared state of one run.
struct Run {
  const InferenceConfig& cfg;
  std::unique_ptr<Task> task;
  CountingSimulator sim;
  TruncationPolicy policy;
  LogDensity prior_ld;
  PosteriorResult result;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  explicit Run(const InferenceConfig& c) : cfg(c), task(make_task(c.task)), sim(*task) {
    validate(cfg);
    policy.box = task->prior().support();
    prior_ld = [t = task.get()](const Vec& theta) { return t->prior_log_density(theta); };
  }

  TrainConfig train_cfg(Salt salt, int round) const {
    TrainConfig t = cfg.train;
    t.seed = round_seed(cfg.seed, salt, round);
    return t;
  }

  void note_fit(const FitResult& f, const std::string& what) {
    if (f.failed) {
      result.training_failed = true;
      result.diagnostics.push_back(what + ": " + f.diagnostic);
    }
  }

  // n draws from the posterior at x_obs, truncated to the prior support.
  SampleMatrix draw_posterior(const Mdn& posterior, int n, std::uint64_t seed) {
    SampleStats stats;
    SampleMatrix s = mdn_sample(posterior, task->x_obs(), n, policy, seed, &stats);
    result.leakage_rejections += stats.rejected;
    return s;
  }

  // Reduces `candidates` to n support points; points pushed past a box prior are clipped.
  SampleMatrix reduce_sp(const SampleMatrix& candidates, int n, std::uint64_t seed) {
    SpConfig sp;
    sp.n = n;
    sp.seed = seed;
    SpResult r = support_points(candidates, sp);
    if (!r.converged) {
      result.sp_converged = false;
      result.diagnostics.push_back("support points stopped at the iteration cap (max movement " +
                                   std::to_string(r.max_movement) + ")");
    }
    if (policy.box) {
      long clipped = 0;
      for (Eigen::Index i = 0; i < r.points.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.points.cols(); ++j) {
          const double v = std::clamp(r.points(i, j), policy.box->low(j), policy.box->high(j));
          clipped += v != r.points(i, j);
          r.points(i, j) = v;
        }
      }
      if (clipped) result.diagnostics.push_back(std::to_string(clipped) + " support point coordinates clipped to the prior box");
    }
    return r.points;
  }

  void finish() {
    result.simulator_calls = sim.calls();
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// How a simulator-based method behaves per round.
struct Plan {
  std::vector<RoundKind> rounds;
  bool sp_every_round = false;
  bool sp_first_round = false;
  bool train_surrogate = false;
};

PosteriorResult run_plan(const InferenceConfig& cfg, const Plan& plan) {
  Run run(cfg);
  const Task& task = *run.task;
  const int sim_rounds =
      static_cast<int>(std::count(plan.rounds.begin(), plan.rounds.end(), RoundKind::Simulator));
  if (sim_rounds < 1 || plan.rounds.front() != RoundKind::Simulator)
    throw std::invalid_argument("a round schedule must start with a simulator round");
  const std::vector<int> budgets = split_budget(cfg.budget, sim_rounds);

  Mdn posterior = make_mdn(task.x_dim(), task.theta_dim(), cfg.mdn, derive_seed(cfg.seed, kPosteriorInit));
  Mdn surrogate = make_mdn(task.theta_dim(), task.x_dim(), cfg.mdn, derive_seed(cfg.seed, kSurrogateInit));
  bool have_posterior = false;
  bool have_surrogate = false;
  SampleMatrix real_theta, real_x;  // simulator pairs
  SampleMatrix all_theta, all_x;    // simulator and surrogate pairs
  int sim_round = 0;
  int last_budget = 0;

  for (std::size_t r = 0; r < plan.rounds.size(); ++r) {
    const int ri = static_cast<int>(r);
    SampleMatrix theta, x;
    if (plan.rounds[r] == RoundKind::Simulator) {
      const int n = budgets[static_cast<std::size_t>(sim_round)];
      const bool use_sp = plan.sp_every_round || (plan.sp_first_round && sim_round == 0);
      const int draw_n = use_sp ? cfg.sp_oversample * n : n;
      SampleMatrix candidates = have_posterior
                                    ? run.draw_posterior(posterior, draw_n, round_seed(cfg.seed, kProposal, ri))
                                    : task.prior_sample(draw_n, round_seed(cfg.seed, kPriorDraw, ri));
      theta = use_sp ? run.reduce_sp(candidates, n, round_seed(cfg.seed, kSpInit, ri)) : std::move(candidates);
      x = run.sim.simulate(theta, round_seed(cfg.seed, kSimulate, ri));
      real_theta = vstack(real_theta, theta);
      real_x = vstack(real_x, x);
      last_budget = n;
      ++sim_round;
      if (plan.train_surrogate) {
        FitResult f = fit_mle(surrogate, real_theta, real_x, run.train_cfg(kSurrogateTrain, ri));
        run.note_fit(f, "surrogate round " + std::to_string(r + 1));
        if (f.failed) {
          run.result.surrogate_fallback = true;
          run.result.diagnostics.push_back("surrogate unusable; surrogate rounds skipped");
        }
        surrogate = std::move(f.model);
        have_surrogate = true;
      }
    } else {
      if (!plan.train_surrogate || !have_surrogate)
        throw std::invalid_argument("surrogate round without a trained surrogate");
      if (run.result.surrogate_fallback) continue;
      const int n = cfg.surrogate_multiplier * last_budget;
      theta = run.draw_posterior(posterior, n, round_seed(cfg.seed, kProposal, ri));
      x = mdn_sample_each(surrogate, theta, round_seed(cfg.seed, kSurrogateDraw, ri));
    }
    all_theta = vstack(all_theta, theta);
    all_x = vstack(all_x, x);

    FitResult f = have_posterior
                      ? fit_atomic(posterior, all_x, all_theta, run.prior_ld, cfg.atoms,
                                   run.train_cfg(kPosteriorTrain, ri))
                      : fit_mle(posterior, all_x, all_theta, run.train_cfg(kPosteriorTrain, ri));
    run.note_fit(f, "posterior round " + std::to_string(r + 1));
    posterior = std::move(f.model);
    have_posterior = true;
  }

  run.result.samples = run.draw_posterior(posterior, cfg.n_post, derive_seed(cfg.seed, kFinalDraw));
  run.result.posterior = posterior;
  if (have_surrogate) run.result.surrogate = surrogate;
  run.result.training_pairs = all_theta.rows();
  run.finish();
  return std::move(run.result);
}

std::vector<RoundKind> simulator_rounds(int rounds) {
  return std::vector<RoundKind>(static_cast<std::size_t>(rounds), RoundKind::Simulator);
}

std::vector<RoundKind> surrogate_schedule(const InferenceConfig& cfg) {
  if (!cfg.schedule.empty()) return cfg.schedule;
  std::vector<RoundKind> s(static_cast<std::size_t>(cfg.rounds), RoundKind::Surrogate);
  s.front() = RoundKind::Simulator;
  return s;
}

// Posterior draws by MCMC on log p(x_obs | theta) + log prior.
MhResult likelihood_mcmc(Run& run, const Mdn& likelihood, int n, int round) {
  const Task& task = *run.task;
  const Vec x_obs = task.x_obs();
  const LogTarget target = [&](const Vec& theta) {
    const double lp = task.prior_log_density(theta);
    if (!std::isfinite(lp)) return lp;
    return lp + mdn_log_prob(likelihood, x_obs, theta);
  };
  MhConfig mh = run.cfg.mh;
  mh.seed = round_seed(run.cfg.seed, kMcmc, round);
  if (mh.proposal_scale.size() == 0) mh.proposal_scale = 0.1 * task.prior().ranges();
  const int needed = (n + mh.chains - 1) / mh.chains * mh.thinning;
  mh.steps = std::max(mh.steps, mh.burn_in + needed);

  // start each chain at the best of a batch of prior draws
  const SampleMatrix cand = task.prior_sample(250 * mh.chains, round_seed(run.cfg.seed, kMcmcInit, round));
  std::vector<std::pair<double, Eigen::Index>> scored;
  for (Eigen::Index i = 0; i < cand.rows(); ++i) {
    const double v = target(cand.row(i).transpose());
    if (std::isfinite(v)) scored.emplace_back(v, i);
  }
  if (static_cast<int>(scored.size()) < mh.chains) throw MhError("no finite starting points for SNLE chains");
  std::partial_sort(scored.begin(), scored.begin() + mh.chains, scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  SampleMatrix init(mh.chains, task.theta_dim());
  for (int c = 0; c < mh.chains; ++c) init.row(c) = cand.row(scored[static_cast<std::size_t>(c)].second);

  MhResult r = rw_metropolis(target, init, mh);
  for (const auto& w : r.warnings) run.result.diagnostics.push_back("mcmc round " + std::to_string(round + 1) + ": " + w);
  return r;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Regular: return "regular";
    case Method::Surrogate: return "surrogate";
    case Method::SupportPoints: return "sp";
    case Method::Combined: return "combined";
    case Method::Snle: return "snle";
    case Method::SnleSurrogate: return "snle_surrogate";
  }
  return "unknown";
}

std::vector<std::string> method_names() {
  return {"regular", "surrogate", "sp", "combined", "snle", "snle_surrogate"};
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::Regular, Method::Surrogate, Method::SupportPoints, Method::Combined,
                   Method::Snle, Method::SnleSurrogate})
    if (method_name(m) == name) return m;
  std::string valid;
  for (const auto& n : method_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw UnknownNameError("unknown method '" + name + "'; valid methods: " + valid);
}

SampleMatrix CountingSimulator::simulate(const SampleMatrix& thetas, std::uint64_t seed) {
  SampleMatrix out(thetas.rows(), task_.x_dim());
  for (Eigen::Index i = 0; i < thetas.rows(); ++i) {
    out.row(i) = task_.simulate(thetas.row(i).transpose(), derive_seed(seed, static_cast<std::uint64_t>(i))).transpose();
    ++calls_;
  }
  return out;
}

std::vector<int> split_budget(int budget, int rounds) {
  if (rounds < 1 || budget < rounds) throw std::invalid_argument("budget must cover at least one call per round");
  std::vector<int> out(static_cast<std::size_t>(rounds), budget / rounds);
  out.back() += budget % rounds;
  return out;
}

PosteriorResult run_regular(const InferenceConfig& cfg) {
  return run_plan(cfg, Plan{.rounds = simulator_rounds(cfg.rounds)});
}

PosteriorResult run_sp(const InferenceConfig& cfg) {
  return run_plan(cfg, Plan{.rounds = simulator_rounds(cfg.rounds), .sp_every_round = true});
}

PosteriorResult run_surrogate(const InferenceConfig& cfg) {
  return run_plan(cfg, Plan{.rounds = surrogate_schedule(cfg), .train_surrogate = true});
}

PosteriorResult run_combined(const InferenceConfig& cfg) {
  return run_plan(cfg, Plan{.rounds = surrogate_schedule(cfg), .sp_first_round = true,
                            .train_surrogate = true});
}

PosteriorResult run_snle(const InferenceConfig& cfg) {
  Run run(cfg);
  const Task& task = *run.task;
  const std::vector<int> budgets = split_budget(cfg.budget, cfg.rounds);
  Mdn likelihood = make_mdn(task.theta_dim(), task.x_dim(), cfg.mdn, derive_seed(cfg.seed, kSurrogateInit));
  SampleMatrix all_theta, all_x;
  SampleMatrix next_theta = task.prior_sample(budgets[0], round_seed(cfg.seed, kPriorDraw, 0));
  MhResult chain;
  for (int r = 0; r < cfg.rounds; ++r) {
    const SampleMatrix x = run.sim.simulate(next_theta, round_seed(cfg.seed, kSimulate, r));
    all_theta = vstack(all_theta, next_theta);
    all_x = vstack(all_x, x);
    FitResult f = fit_mle(likelihood, all_theta, all_x, run.train_cfg(kSurrogateTrain, r));
    run.note_fit(f, "likelihood round " + std::to_string(r + 1));
    likelihood = std::move(f.model);
    const bool last = r + 1 == cfg.rounds;
    const int n = last ? cfg.n_post : budgets[static_cast<std::size_t>(r + 1)];
    chain = likelihood_mcmc(run, likelihood, n, r);
    if (!last) next_theta = chain.take(n);
  }
  run.result.samples = chain.take(cfg.n_post);
  run.result.surrogate = likelihood;
  run.result.training_pairs = all_theta.rows();
  run.finish();
  return std::move(run.result);
}

PosteriorResult run_snle_surrogate(const InferenceConfig& cfg) {
  Run run(cfg);
  const Task& task = *run.task;
  const SampleMatrix theta = task.prior_sample(cfg.budget, round_seed(cfg.seed, kPriorDraw, 0));
  const SampleMatrix x = run.sim.simulate(theta, round_seed(cfg.seed, kSimulate, 0));

  Mdn likelihood = make_mdn(task.theta_dim(), task.x_dim(), cfg.mdn, derive_seed(cfg.seed, kSurrogateInit));
  FitResult lf = fit_mle(likelihood, theta, x, run.train_cfg(kSurrogateTrain, 0));
  run.note_fit(lf, "likelihood round 1");
  likelihood = std::move(lf.model);

  Mdn posterior = make_mdn(task.x_dim(), task.theta_dim(), cfg.mdn, derive_seed(cfg.seed, kPosteriorInit));
  FitResult pf = fit_mle(posterior, x, theta, run.train_cfg(kPosteriorTrain, 0));
  run.note_fit(pf, "posterior round 1");
  posterior = std::move(pf.model);

  SampleMatrix all_theta = theta, all_x = x;
  if (lf.failed) {
    run.result.surrogate_fallback = true;
    run.result.diagnostics.push_back("likelihood model unusable; surrogate round skipped");
  } else {
    const int n = cfg.surrogate_multiplier * cfg.budget;
    const SampleMatrix sur_theta = likelihood_mcmc(run, likelihood, n, 1).take(n);
    const SampleMatrix sur_x = mdn_sample_each(likelihood, sur_theta, round_seed(cfg.seed, kSurrogateDraw, 1));
    all_theta = vstack(all_theta, sur_theta);
    all_x = vstack(all_x, sur_x);
    FitResult f = fit_atomic(posterior, all_x, all_theta, run.prior_ld, cfg.atoms,
                             run.train_cfg(kPosteriorTrain, 1));
    run.note_fit(f, "posterior round 2");
    posterior = std::move(f.model);
  }
  run.result.samples = run.draw_posterior(posterior, cfg.n_post, derive_seed(cfg.seed, kFinalDraw));
  run.result.posterior = posterior;
  run.result.surrogate = likelihood;
  run.result.training_pairs = all_theta.rows();
  run.finish();
  return std::move(run.result);
}

PosteriorResult run_inference(const InferenceConfig& cfg) {
  switch (cfg.method) {
    case Method::Regular: return run_regular(cfg);
    case Method::Surrogate: return run_surrogate(cfg);
    case Method::SupportPoints: return run_sp(cfg);
    case Method::Combined: return run_combined(cfg);
    case Method::Snle: return run_snle(cfg);
    case Method::SnleSurrogate: return run_snle_surrogate(cfg);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace sbi
