#include "sbi/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "sbi/csv.hpp"

namespace sbi {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Named seeds of the frozen assets.
constexpr std::uint64_t kAssetSeedLrDesign = 0x4c52'4445'5349'474eULL;
constexpr std::uint64_t kAssetSeedLrTheta = 0x4c52'5448'4554'4131ULL;
constexpr std::uint64_t kAssetSeedLrXobs = 0x4c52'584f'4253'3031ULL;
constexpr std::uint64_t kAssetSeedGlmStimulus = 0x474c'4d53'5449'4d31ULL;
constexpr std::uint64_t kAssetSeedGlmXobs = 0x474c'4d58'4f42'5331ULL;
constexpr std::uint64_t kAssetSeedSlcpXobs = 0x534c'4350'584f'4231ULL;

constexpr double kLrNoiseSd = 0.1;

Vec vec_of(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double sigmoid(double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); }

double log1p_exp(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

// Starting points for MH: the `chains` best of `candidates` prior draws.
SampleMatrix best_prior_points(const Task& task, const LogTarget& target, int chains,
                               int candidates, Rng& rng) {
  const SampleMatrix draws = task.prior().sample(candidates, rng);
  std::vector<std::pair<double, Eigen::Index>> scored;
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    const double lp = target(draws.row(i).transpose());
    if (std::isfinite(lp)) scored.emplace_back(lp, i);
  }
  if (static_cast<int>(scored.size()) < chains) throw MhError("too few finite starting points");
  std::partial_sort(scored.begin(), scored.begin() + chains, scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  SampleMatrix init(chains, draws.cols());
  for (int c = 0; c < chains; ++c) init.row(c) = draws.row(scored[static_cast<std::size_t>(c)].second);
  return init;
}

void record(ReferenceDiagnostics* diag, const MhResult& r) {
  if (!diag) return;
  diag->acceptance_rate = r.acceptance_rate;
  diag->split_rhat = r.split_rhat;
  diag->warnings = r.warnings;
}

MhConfig reference_mh_config(const Task& task, int n, std::uint64_t seed) {
  MhConfig cfg;
  cfg.seed = seed;
  cfg.proposal_scale = 0.1 * task.prior().ranges();
  const int kept = cfg.steps - cfg.burn_in;
  // keep enough post-burn-in draws for the request
  const int needed = (n + cfg.chains - 1) / cfg.chains;
  if (needed > kept) cfg.steps = cfg.burn_in + needed;
  return cfg;
}

// ---------------------------------------------------------------------------

class GmmTask final : public Task {
 public:
  GmmTask()
      : Task("gmm1d", "1D GMM", Prior::box(vec_of({-10.0}), vec_of({10.0})), 1,
             {100, 200, 300, 400, 500, 750, 1000, 1250, 1500, 1750, 2000}) {
    theta_true_ = vec_of({0.0});
    x_obs_ = vec_of({0.0});
  }

  SampleMatrix reference_posterior_sample(int n, std::uint64_t seed,
                                          ReferenceDiagnostics*) const override {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    SampleMatrix out(n, 1);
    for (int i = 0; i < n;) {
      const double sd = u(rng) < 0.5 ? 0.1 : 1.0;
      const double t = x_obs_(0) + sd * normal(rng);
      if (t < -10.0 || t > 10.0) continue;
      out(i++, 0) = t;
    }
    return out;
  }

 protected:
  Vec simulate_impl(const Vec& theta, Rng& rng) const override {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = u(rng) < 0.5 ? 0.1 : 1.0;
    return vec_of({theta(0) + sd * normal(rng)});
  }
};

class BayesLrTask final : public Task {
 public:
  BayesLrTask()
      : Task("bayes_lr", "6D Bayes LR", Prior::gaussian(Vec::Zero(6), Mat::Identity(6, 6)), 10,
             {250, 500, 750, 1000, 1500, 2500, 5000, 7500, 10000}) {
    const TaskAssets& a = task_assets();
    design_ = a.lr_design;
    theta_true_ = a.lr_theta_true;
    x_obs_ = a.lr_x_obs;
    posterior_ = bayes_lr_posterior(design_, x_obs_, kLrNoiseSd);
    posterior_chol_ = Eigen::LLT<Mat>(posterior_.cov).matrixL();
  }

  const Mat& design() const { return design_; }

  SampleMatrix reference_posterior_sample(int n, std::uint64_t seed,
                                          ReferenceDiagnostics*) const override {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SampleMatrix out(n, 6);
    Vec z(6);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 6; ++j) z(j) = normal(rng);
      out.row(i) = (posterior_.mean + posterior_chol_ * z).transpose();
    }
    return out;
  }

 protected:
  Vec simulate_impl(const Vec& theta, Rng& rng) const override {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec y = design_ * theta;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += kLrNoiseSd * normal(rng);
    return y;
  }

 private:
  Mat design_;
  GaussianPosterior posterior_;
  Mat posterior_chol_;
};

class TwoMoonsTask final : public Task {
 public:
  TwoMoonsTask()
      : Task("two_moons", "2 Moons", Prior::box(vec_of({-1.0, -1.0}), vec_of({1.0, 1.0})), 2,
             {100, 200, 300, 400, 500, 750, 1000, 1250, 1500, 1750, 2000}) {
    theta_true_ = vec_of({0.25, 0.25});
    x_obs_ = vec_of({0.0, 0.0});
  }

  SampleMatrix reference_posterior_sample(int n, std::uint64_t seed,
                                          ReferenceDiagnostics*) const override {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> alpha_dist(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
    std::normal_distribution<double> r_dist(0.1, 0.01);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SampleMatrix out(n, 2);
    const double sqrt2 = std::numbers::sqrt2;
    for (int i = 0; i < n;) {
      const double alpha = alpha_dist(rng);
      const double r = r_dist(rng);
      const double v1 = r * std::cos(alpha) + 0.25;
      const double v2 = r * std::sin(alpha);
      const double q1 = v1 - x_obs_(0);
      const double q2 = x_obs_(1) - v2;
      if (q1 < 0.0) continue;
      const double s = u(rng) < 0.5 ? -1.0 : 1.0;
      const double t2 = (s * q1 + q2) / sqrt2;
      const double t1 = (s * q1 - q2) / sqrt2;
      if (t1 < -1.0 || t1 > 1.0 || t2 < -1.0 || t2 > 1.0) continue;
      out(i, 0) = t1;
      out(i, 1) = t2;
      ++i;
    }
    return out;
  }

 protected:
  Vec simulate_impl(const Vec& theta, Rng& rng) const override {
    std::uniform_real_distribution<double> alpha_dist(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
    std::normal_distribution<double> r_dist(0.1, 0.01);
    const double alpha = alpha_dist(rng);
    const double r = r_dist(rng);
    return two_moons_map(theta, alpha, r);
  }
};

class SlcpTask final : public Task {
 public:
  SlcpTask()
      : Task("slcp", "5D SLCP", Prior::box(Vec::Constant(5, -3.0), Vec::Constant(5, 3.0)), 16,
             {250, 500, 1000, 2500, 5000, 7500}) {
    theta_true_ = vec_of({0.7, -2.9, -1.0, -0.9, 0.6});
    x_obs_ = task_assets().slcp_x_obs;
  }

  SampleMatrix reference_posterior_sample(int n, std::uint64_t seed,
                                          ReferenceDiagnostics* diag) const override {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    const LogTarget target = [this](const Vec& t) {
      const double lp = prior_.log_density(t);
      if (!std::isfinite(lp)) return lp;
      return lp + slcp_log_likelihood(x_obs_, t);
    };
    Rng rng(derive_seed(seed, 1));
    MhConfig cfg = reference_mh_config(*this, n, derive_seed(seed, 2));
    const SampleMatrix init = best_prior_points(*this, target, cfg.chains, 20000, rng);
    MhResult r = rw_metropolis(target, init, cfg);
    // The likelihood depends on theta3 and theta4 only through their squares:
    // fold onto the positive orthant, then mirror each draw into one of the
    // four symmetric modes uniformly at random.
    for (auto& c : r.chains) {
      c.col(2) = c.col(2).cwiseAbs();
      c.col(3) = c.col(3).cwiseAbs();
    }
    r.split_rhat = split_rhat(r.chains);
    r.warnings.clear();
    if (!(r.split_rhat.maxCoeff() < 1.05))
      r.warnings.push_back("split R-hat " + std::to_string(r.split_rhat.maxCoeff()) + " exceeds 1.05");
    record(diag, r);
    SampleMatrix out = r.take(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      if (u(rng) < 0.5) out(i, 2) = -out(i, 2);
      if (u(rng) < 0.5) out(i, 3) = -out(i, 3);
    }
    return out;
  }

 protected:
  Vec simulate_impl(const Vec& theta, Rng& rng) const override {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s1 = theta(2) * theta(2);
    const double s2 = theta(3) * theta(3);
    const double rho = std::tanh(theta(4));
    Vec x(16);
    for (int i = 0; i < 8; ++i) {
      const double e1 = normal(rng);
      const double e2 = normal(rng);
      x(2 * i) = theta(0) + s1 * e1;
      x(2 * i + 1) = theta(1) + s2 * (rho * e1 + std::sqrt(1.0 - rho * rho) * e2);
    }
    return x;
  }
};

class GlmTask final : public Task {
 public:
  GlmTask()
      : Task("bernoulli_glm", "10D BerGLM", Prior::gaussian(Vec::Zero(10), glm_prior_covariance()),
             10, {250, 500, 1000, 1500, 2500, 5000, 7500, 10000}) {
    const TaskAssets& a = task_assets();
    design_ = glm_design_matrix(a.glm_stimulus);
    theta_true_ = vec_of({0.955, -0.452, 0.223, 1.105, 0.271, -0.358, -0.672, -0.206, 0.306, -0.436});
    x_obs_ = a.glm_x_obs;
  }

  SampleMatrix reference_posterior_sample(int n, std::uint64_t seed,
                                          ReferenceDiagnostics* diag) const override {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    const LogTarget target = [this](const Vec& t) {
      return prior_.log_density(t) + glm_log_likelihood(design_, x_obs_, t);
    };
    // Laplace approximation (the log posterior is concave) for start points and proposal scale.
    const Mat prior_prec = prior_.cov().inverse();
    Vec mode = Vec::Zero(10);
    Mat hess = prior_prec;
    for (int it = 0; it < 50; ++it) {
      const Vec p = (design_ * mode).unaryExpr([](double v) { return sigmoid(v); });
      const Vec grad = x_obs_ - design_.transpose() * p - prior_prec * mode;
      const Vec w = p.array() * (1.0 - p.array());
      hess = design_.transpose() * w.asDiagonal() * design_ + prior_prec;
      const Vec step = hess.llt().solve(grad);
      mode += step;
      if (step.norm() < 1e-12) break;
    }
    const Mat laplace_cov = hess.inverse();
    const Mat laplace_chol = Eigen::LLT<Mat>(laplace_cov).matrixL();

    MhConfig cfg = reference_mh_config(*this, n, derive_seed(seed, 2));
    cfg.proposal_scale = laplace_cov.diagonal().cwiseSqrt();
    Rng rng(derive_seed(seed, 1));
    std::normal_distribution<double> normal(0.0, 1.0);
    SampleMatrix init(cfg.chains, 10);
    Vec z(10);
    for (int c = 0; c < cfg.chains; ++c) {
      for (int j = 0; j < 10; ++j) z(j) = normal(rng);
      init.row(c) = (mode + 2.0 * laplace_chol * z).transpose();
    }
    const MhResult r = rw_metropolis(target, init, cfg);
    record(diag, r);
    return r.take(n);
  }

 protected:
  Vec simulate_impl(const Vec& theta, Rng& rng) const override {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Vec eta = design_ * theta;
    Vec y(eta.size());
    for (Eigen::Index k = 0; k < eta.size(); ++k) y(k) = u(rng) < sigmoid(eta(k)) ? 1.0 : 0.0;
    return design_.transpose() * y;
  }

 private:
  Mat design_;
};

class SissonTask final : public Task {
 public:
  SissonTask()
      : Task("sisson", "3D Sisson", Prior::box(Vec::Constant(3, -20.0), Vec::Constant(3, 40.0)), 3,
             {250, 500, 1000, 1500, 2500, 5000, 7500}) {
    theta_true_ = Vec::Constant(3, 5.0);
    x_obs_ = Vec::Constant(3, 5.0);
    Mat cov = Mat::Constant(3, 3, 0.7);
    cov.diagonal().setOnes();
    chol_ = Eigen::LLT<Mat>(cov).matrixL();
  }

  SampleMatrix reference_posterior_sample(int n, std::uint64_t seed,
                                          ReferenceDiagnostics*) const override {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    SampleMatrix out(n, 3);
    Vec z(3);
    for (int i = 0; i < n;) {
      // sign pattern: b_i = 1 with probability 1 - omega, flipping that coordinate
      Vec sign(3);
      for (int j = 0; j < 3; ++j) sign(j) = u(rng) < kOmega ? 1.0 : -1.0;
      for (int j = 0; j < 3; ++j) z(j) = normal(rng);
      // theta ~ N(D x_obs, D Sigma D) with D = diag(sign)
      const Vec theta = (sign.array() * (x_obs_ + chol_ * z).array()).matrix();
      if (!prior_.contains(theta)) continue;
      out.row(i++) = theta.transpose();
    }
    return out;
  }

 protected:
  Vec simulate_impl(const Vec& theta, Rng& rng) const override {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec mean(3);
    for (int j = 0; j < 3; ++j) mean(j) = (u(rng) < kOmega ? 1.0 : -1.0) * theta(j);
    Vec z(3);
    for (int j = 0; j < 3; ++j) z(j) = normal(rng);
    return mean + chol_ * z;
  }

 private:
  static constexpr double kOmega = 0.7;
  Mat chol_;
};

// Conjugate toy problem: theta ~ N(0, I2), x | theta ~ N(theta, 0.1^2 I2).
class LinearGaussianTask final : public Task {
 public:
  LinearGaussianTask()
      : Task("linear_gaussian", "2D Linear Gaussian",
             Prior::gaussian(Vec::Zero(2), Mat::Identity(2, 2)), 2, {100, 500, 1000}) {
    theta_true_ = vec_of({0.5, -0.3});
    x_obs_ = vec_of({0.5, -0.3});
  }

  SampleMatrix reference_posterior_sample(int n, std::uint64_t seed,
                                          ReferenceDiagnostics*) const override {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    const double prec = 1.0 + 1.0 / (kNoise * kNoise);
    const Vec mean = x_obs_ / (kNoise * kNoise) / prec;
    const double sd = 1.0 / std::sqrt(prec);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SampleMatrix out(n, 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j) out(i, j) = mean(j) + sd * normal(rng);
    return out;
  }

 protected:
  Vec simulate_impl(const Vec& theta, Rng& rng) const override {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec x(2);
    for (int j = 0; j < 2; ++j) x(j) = theta(j) + kNoise * normal(rng);
    return x;
  }

 private:
  static constexpr double kNoise = 0.1;
};

}  // namespace

// ---------------------------------------------------------------------------

Prior Prior::box(Vec low, Vec high) {
  if (low.size() != high.size() || low.size() == 0) throw DimensionError("box prior bounds mismatch");
  for (Eigen::Index i = 0; i < low.size(); ++i)
    if (!(low(i) < high(i))) throw std::invalid_argument("box prior needs low < high");
  Prior p;
  p.is_box_ = true;
  p.low_ = std::move(low);
  p.high_ = std::move(high);
  p.log_norm_ = -(p.high_ - p.low_).array().log().sum();
  return p;
}

Prior Prior::gaussian(Vec mean, Mat cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size() || mean.size() == 0)
    throw DimensionError("gaussian prior shape mismatch");
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("prior covariance is not SPD");
  Prior p;
  p.is_box_ = false;
  p.mean_ = std::move(mean);
  p.cov_ = std::move(cov);
  p.chol_ = llt.matrixL();
  p.precision_ = llt.solve(Mat::Identity(p.cov_.rows(), p.cov_.cols()));
  p.log_norm_ = -0.5 * static_cast<double>(p.mean_.size()) * kLog2Pi -
                p.chol_.diagonal().array().log().sum();
  return p;
}

SampleMatrix Prior::sample(int n, Rng& rng) const {
  if (n < 1) throw std::invalid_argument("prior sample size must be >= 1");
  const int d = dim();
  SampleMatrix out(n, d);
  if (is_box_) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) out(i, j) = low_(j) + (high_(j) - low_(j)) * u(rng);
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec z(d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) z(j) = normal(rng);
      out.row(i) = (mean_ + chol_ * z).transpose();
    }
  }
  return out;
}

double Prior::log_density(const Vec& theta) const {
  if (theta.size() != dim()) throw DimensionError("prior log density: dimension mismatch");
  if (is_box_) return contains(theta) ? log_norm_ : -std::numeric_limits<double>::infinity();
  const Vec r = theta - mean_;
  return log_norm_ - 0.5 * r.dot(precision_ * r);
}

bool Prior::contains(const Vec& theta) const {
  if (theta.size() != dim()) return false;
  if (!theta.allFinite()) return false;
  if (!is_box_) return true;
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    if (theta(i) < low_(i) || theta(i) > high_(i)) return false;
  return true;
}

Vec Prior::ranges() const {
  if (is_box_) return high_ - low_;
  return 6.0 * cov_.diagonal().cwiseSqrt();
}

std::optional<BoxBounds> Prior::support() const {
  if (!is_box_) return std::nullopt;
  return BoxBounds{low_, high_};
}

Task::Task(std::string name, std::string display_name, Prior prior, int x_dim,
           std::vector<int> budgets)
    : name_(std::move(name)),
      display_name_(std::move(display_name)),
      prior_(std::move(prior)),
      x_dim_(x_dim),
      budgets_(std::move(budgets)) {}

SampleMatrix Task::prior_sample(int n, std::uint64_t seed) const {
  Rng rng(seed);
  return prior_.sample(n, rng);
}

Vec Task::simulate(const Vec& theta, Rng& rng) const {
  if (theta.size() != theta_dim())
    throw DimensionError(name_ + ": theta has " + std::to_string(theta.size()) +
                         " entries, expected " + std::to_string(theta_dim()));
  if (!prior_.contains(theta)) throw std::invalid_argument(name_ + ": theta outside the prior support");
  return simulate_impl(theta, rng);
}

Vec Task::simulate(const Vec& theta, std::uint64_t seed) const {
  Rng rng(seed);
  return simulate(theta, rng);
}

std::vector<std::string> task_names() {
  return {"gmm1d", "bayes_lr", "two_moons", "slcp", "bernoulli_glm", "sisson", "linear_gaussian"};
}

std::unique_ptr<Task> make_task(const std::string& name) {
  if (name == "gmm1d") return std::make_unique<GmmTask>();
  if (name == "bayes_lr") return std::make_unique<BayesLrTask>();
  if (name == "two_moons") return std::make_unique<TwoMoonsTask>();
  if (name == "slcp") return std::make_unique<SlcpTask>();
  if (name == "bernoulli_glm") return std::make_unique<GlmTask>();
  if (name == "sisson") return std::make_unique<SissonTask>();
  if (name == "linear_gaussian") return std::make_unique<LinearGaussianTask>();
  std::string valid;
  for (const auto& n : task_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw UnknownNameError("unknown task '" + name + "'; valid tasks: " + valid);
}

Vec two_moons_map(const Vec& theta, double alpha, double r) {
  const double sqrt2 = std::numbers::sqrt2;
  Vec x(2);
  x(0) = r * std::cos(alpha) + 0.25 - std::abs(theta(0) + theta(1)) / sqrt2;
  x(1) = r * std::sin(alpha) + (-theta(0) + theta(1)) / sqrt2;
  return x;
}

Mat glm_prior_covariance() {
  Mat f = Mat::Zero(9, 9);
  for (int j = 0; j < 9; ++j) {
    if (j >= 2) f(j, j - 2) = 1.0;
    if (j >= 1) f(j, j - 1) = -2.0;
    f(j, j) = 1.0 + std::sqrt(static_cast<double>(j) / 9.0);
  }
  Mat cov = Mat::Zero(10, 10);
  cov(0, 0) = 2.0;
  cov.bottomRightCorner(9, 9) = (f.transpose() * f).inverse();
  // symmetrize away round-off
  cov = 0.5 * (cov + cov.transpose()).eval();
  return cov;
}

Mat glm_design_matrix(const Vec& stimulus) {
  const Eigen::Index T = stimulus.size();
  Mat x = Mat::Zero(T, 10);
  for (Eigen::Index k = 0; k < T; ++k) {
    x(k, 0) = 1.0;
    for (Eigen::Index lag = 0; lag < 9; ++lag)
      if (k - lag >= 0) x(k, 1 + lag) = stimulus(k - lag);
  }
  return x;
}

double glm_log_likelihood(const Mat& design, const Vec& summary, const Vec& theta) {
  const Vec eta = design * theta;
  double ll = theta.dot(summary);
  for (Eigen::Index k = 0; k < eta.size(); ++k) ll -= log1p_exp(eta(k));
  return ll;
}

double slcp_log_likelihood(const Vec& x, const Vec& theta) {
  if (x.size() != 16 || theta.size() != 5) throw DimensionError("slcp: expects 16-d x and 5-d theta");
  const double s1 = theta(2) * theta(2);
  const double s2 = theta(3) * theta(3);
  const double rho = std::tanh(theta(4));
  const double one_m_rho2 = 1.0 - rho * rho;
  if (!(s1 > 0.0 && s2 > 0.0 && one_m_rho2 > 0.0)) return -std::numeric_limits<double>::infinity();
  const double log_det = 2.0 * std::log(s1) + 2.0 * std::log(s2) + std::log(one_m_rho2);
  double ll = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double u = (x(2 * i) - theta(0)) / s1;
    const double v = (x(2 * i + 1) - theta(1)) / s2;
    const double q = (u * u - 2.0 * rho * u * v + v * v) / one_m_rho2;
    ll += -kLog2Pi - 0.5 * log_det - 0.5 * q;
  }
  return ll;
}

GaussianPosterior bayes_lr_posterior(const Mat& design, const Vec& y, double noise_sd) {
  const double inv_var = 1.0 / (noise_sd * noise_sd);
  const Mat precision =
      inv_var * design.transpose() * design + Mat::Identity(design.cols(), design.cols());
  GaussianPosterior p;
  p.cov = precision.llt().solve(Mat::Identity(design.cols(), design.cols()));
  p.cov = 0.5 * (p.cov + p.cov.transpose()).eval();
  p.mean = inv_var * p.cov * design.transpose() * y;
  return p;
}

// ---------------------------------------------------------------------------

TaskAssets generate_task_assets() {
  TaskAssets a;
  {
    Rng rng(kAssetSeedLrDesign);
    std::normal_distribution<double> normal(0.0, 1.0);
    a.lr_design.resize(10, 6);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 6; ++j) a.lr_design(i, j) = normal(rng);
  }
  {
    Rng rng(kAssetSeedLrTheta);
    std::normal_distribution<double> normal(0.0, 1.0);
    a.lr_theta_true.resize(6);
    for (int j = 0; j < 6; ++j) a.lr_theta_true(j) = normal(rng);
  }
  {
    Rng rng(kAssetSeedLrXobs);
    std::normal_distribution<double> normal(0.0, 1.0);
    a.lr_x_obs = a.lr_design * a.lr_theta_true;
    for (int i = 0; i < 10; ++i) a.lr_x_obs(i) += kLrNoiseSd * normal(rng);
  }
  {
    Rng rng(kAssetSeedGlmStimulus);
    std::normal_distribution<double> normal(0.0, 1.0);
    a.glm_stimulus.resize(100);
    for (int i = 0; i < 100; ++i) a.glm_stimulus(i) = normal(rng);
  }
  {
    Rng rng(kAssetSeedGlmXobs);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Mat design = glm_design_matrix(a.glm_stimulus);
    const Vec theta = vec_of({0.955, -0.452, 0.223, 1.105, 0.271, -0.358, -0.672, -0.206, 0.306, -0.436});
    const Vec eta = design * theta;
    Vec y(eta.size());
    for (Eigen::Index k = 0; k < eta.size(); ++k) y(k) = u(rng) < sigmoid(eta(k)) ? 1.0 : 0.0;
    a.glm_x_obs = design.transpose() * y;
  }
  {
    Rng rng(kAssetSeedSlcpXobs);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Vec theta = vec_of({0.7, -2.9, -1.0, -0.9, 0.6});
    const double s1 = theta(2) * theta(2);
    const double s2 = theta(3) * theta(3);
    const double rho = std::tanh(theta(4));
    a.slcp_x_obs.resize(16);
    for (int i = 0; i < 8; ++i) {
      const double e1 = normal(rng);
      const double e2 = normal(rng);
      a.slcp_x_obs(2 * i) = theta(0) + s1 * e1;
      a.slcp_x_obs(2 * i + 1) = theta(1) + s2 * (rho * e1 + std::sqrt(1.0 - rho * rho) * e2);
    }
  }
  return a;
}

namespace {

SampleMatrix as_row(const Vec& v) { return v.transpose(); }

Vec load_row(const std::filesystem::path& p, Eigen::Index expected) {
  const SampleMatrix m = read_csv(p);
  if (m.rows() != 1 || m.cols() != expected)
    throw Error("task asset " + p.string() + " has unexpected shape");
  return m.row(0).transpose();
}

}  // namespace

void write_task_assets(const TaskAssets& a, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_csv(dir / "bayes_lr_design.csv", a.lr_design);
  write_csv(dir / "bayes_lr_theta_true.csv", as_row(a.lr_theta_true));
  write_csv(dir / "bayes_lr_x_obs.csv", as_row(a.lr_x_obs));
  write_csv(dir / "bernoulli_glm_stimulus.csv", as_row(a.glm_stimulus));
  write_csv(dir / "bernoulli_glm_x_obs.csv", as_row(a.glm_x_obs));
  write_csv(dir / "slcp_x_obs.csv", as_row(a.slcp_x_obs));
}

TaskAssets load_task_assets(const std::filesystem::path& dir) {
  TaskAssets a;
  a.lr_design = read_csv(dir / "bayes_lr_design.csv");
  if (a.lr_design.rows() != 10 || a.lr_design.cols() != 6)
    throw Error("task asset bayes_lr_design.csv must be 10 x 6");
  a.lr_theta_true = load_row(dir / "bayes_lr_theta_true.csv", 6);
  a.lr_x_obs = load_row(dir / "bayes_lr_x_obs.csv", 10);
  a.glm_stimulus = load_row(dir / "bernoulli_glm_stimulus.csv", 100);
  a.glm_x_obs = load_row(dir / "bernoulli_glm_x_obs.csv", 10);
  a.slcp_x_obs = load_row(dir / "slcp_x_obs.csv", 16);
  return a;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SBI_DATA_DIR"); env && *env) return env;
#ifdef SBI_DATA_DIR
  return SBI_DATA_DIR;
#else
  return "data";
#endif
}

const TaskAssets& task_assets() {
  static const TaskAssets assets = load_task_assets(default_data_dir());
  return assets;
}

}  // namespace sbi
