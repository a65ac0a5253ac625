#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sbi/density.hpp"
#include "sbi/mcmc.hpp"
#include "sbi/types.hpp"

namespace sbi {

// Box-uniform or multivariate normal prior.
class Prior {
 public:
  static Prior box(Vec low, Vec high);
  static Prior gaussian(Vec mean, Mat cov);

  bool is_box() const { return is_box_; }
  int dim() const { return static_cast<int>(is_box_ ? low_.size() : mean_.size()); }
  const Vec& low() const { return low_; }
  const Vec& high() const { return high_; }
  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }

  SampleMatrix sample(int n, Rng& rng) const;
  double log_density(const Vec& theta) const;  // -inf outside a box
  bool contains(const Vec& theta) const;
  // Per-dimension scale: box width, or 6 marginal SDs for a Gaussian.
  Vec ranges() const;
  // Box support for truncation; empty for Gaussian priors.
  std::optional<BoxBounds> support() const;

 private:
  bool is_box_ = true;
  Vec low_, high_;
  Vec mean_;
  Mat cov_, chol_, precision_;
  double log_norm_ = 0.0;
};

struct ReferenceDiagnostics {
  double acceptance_rate = 0.0;
  Vec split_rhat;
  std::vector<std::string> warnings;
};

class Task {
 public:
  virtual ~Task() = default;

  const std::string& name() const { return name_; }
  const std::string& display_name() const { return display_name_; }
  int theta_dim() const { return prior_.dim(); }
  int x_dim() const { return x_dim_; }
  const Prior& prior() const { return prior_; }
  const Vec& theta_true() const { return theta_true_; }
  const Vec& x_obs() const { return x_obs_; }
  // Simulation budgets of the benchmark grid for this task.
  const std::vector<int>& budgets() const { return budgets_; }

  SampleMatrix prior_sample(int n, std::uint64_t seed) const;
  double prior_log_density(const Vec& theta) const { return prior_.log_density(theta); }

  // One draw from p(x | theta); throws when theta is outside the prior support.
  Vec simulate(const Vec& theta, Rng& rng) const;
  Vec simulate(const Vec& theta, std::uint64_t seed) const;

  // n draws from p(theta | x_obs).
  virtual SampleMatrix reference_posterior_sample(int n, std::uint64_t seed,
                                                  ReferenceDiagnostics* diag = nullptr) const = 0;

 protected:
  Task(std::string name, std::string display_name, Prior prior, int x_dim,
       std::vector<int> budgets);
  virtual Vec simulate_impl(const Vec& theta, Rng& rng) const = 0;

  std::string name_;
  std::string display_name_;
  Prior prior_;
  int x_dim_;
  std::vector<int> budgets_;
  Vec theta_true_;
  Vec x_obs_;
};

class UnknownNameError : public Error {
 public:
  using Error::Error;
};

std::vector<std::string> task_names();
// Throws UnknownNameError listing the valid names.
std::unique_ptr<Task> make_task(const std::string& name);

// ---- task-specific pieces exposed for testing ----

// Two Moons simulator with its noise (alpha, r) pinned.
Vec two_moons_map(const Vec& theta, double alpha, double r);

// Bernoulli GLM prior covariance: 2 for the intercept, (F^T F)^{-1} for the
// nine filter weights with F the second-difference smoothing operator.
Mat glm_prior_covariance();
// T x 10 design matrix: intercept plus a zero-padded 9-tap window on the stimulus.
Mat glm_design_matrix(const Vec& stimulus);
// Exact log-likelihood of the sufficient statistic S = X^T y under the logistic model.
double glm_log_likelihood(const Mat& design, const Vec& summary, const Vec& theta);

// log p(x | theta) for SLCP: eight iid bivariate normals, x flattened to 16 values.
double slcp_log_likelihood(const Vec& x, const Vec& theta);

// Closed-form Gaussian posterior of the Bayesian linear regression task.
struct GaussianPosterior {
  Vec mean;
  Mat cov;
};
GaussianPosterior bayes_lr_posterior(const Mat& design, const Vec& y, double noise_sd);

// ---- frozen task assets ----

struct TaskAssets {
  Mat lr_design;      // 10 x 6
  Vec lr_theta_true;  // 6
  Vec lr_x_obs;       // 10
  Vec glm_stimulus;   // 100
  Vec glm_x_obs;      // 10
  Vec slcp_x_obs;     // 16
};

// Regenerates the assets from their named seeds.
TaskAssets generate_task_assets();
void write_task_assets(const TaskAssets& assets, const std::filesystem::path& dir);
TaskAssets load_task_assets(const std::filesystem::path& dir);
// SBI_DATA_DIR environment variable, else the configured source data directory.
std::filesystem::path default_data_dir();
// Assets loaded once from default_data_dir().
const TaskAssets& task_assets();

}  // namespace sbi
