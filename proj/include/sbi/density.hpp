#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbi/nn_core.hpp"
#include "sbi/types.hpp"

namespace sbi {

struct MdnConfig {
  int components = 10;
  std::vector<int> hidden = {50, 50};
  Activation activation = Activation::Tanh;
};

// Conditional Gaussian mixture p(event | condition). The trunk maps the
// (standardized) condition to all head parameters at once, laid out as
//   [ logits (K) | means (K*d) | cholesky (K * d(d+1)/2) ]
// where each Cholesky block is the row-major lower triangle of the covariance
// factor L with its diagonal stored as log L_ii.
struct Mdn {
  Mlp trunk;
  int components = 0;
  int event_dim = 0;
  int cond_dim = 0;

  // Affine standardization applied before the trunk / mixture. Identity until set.
  bool standardized = false;
  Vec cond_mean, cond_sd;
  Vec event_mean, event_sd;

  int head_size() const;
};

int mdn_head_size(int components, int event_dim);

Mdn make_mdn(int cond_dim, int event_dim, const MdnConfig& cfg, std::uint64_t seed);

// Network whose head output is `head` for every condition (all trunk weights zero).
Mdn make_constant_mdn(int cond_dim, int event_dim, int components, const Vec& head,
                      const MdnConfig& cfg = {});

// Packs mixture parameters into the head layout. `chol_factors[k]` is a lower
// triangular covariance factor with a strictly positive diagonal.
Vec pack_mixture_head(const Vec& logits, const Mat& means, const std::vector<Mat>& chol_factors);

struct MixtureParams {
  Vec weights;                    // softmax of the logits
  Mat means;                      // K x d
  std::vector<Mat> chol_factors;  // covariance = L L^T
};

// Mixture parameters in the original (unstandardized) event space.
MixtureParams mdn_mixture(const Mdn& model, const Vec& condition);

// log of the normalized mixture density at `event` given `condition`.
double mdn_log_prob(const Mdn& model, const Vec& event, const Vec& condition);
// Row-wise log densities; a single-row `conditions` is broadcast.
Vec mdn_log_prob_batch(const Mdn& model, const SampleMatrix& events,
                       const SampleMatrix& conditions);

// Log density of a Gaussian mixture head (standardized space) at `event`.
// When `grad` is non-null it receives d(log p)/d(head).
double mixture_head_log_prob(const double* head, int components, int event_dim,
                             const double* event, double* grad);

struct BoxBounds {
  Vec low;
  Vec high;
  bool contains(const Eigen::Ref<const Vec>& x) const;
};

struct TruncationPolicy {
  std::optional<BoxBounds> box;  // unbounded support when empty
  int max_attempts_factor = 100;  // rejection budget is factor * n draws
};

class LeakageError : public Error {
 public:
  using Error::Error;
};

struct SampleStats {
  long accepted = 0;
  long rejected = 0;
};

// n draws from p(. | condition). Draws outside the policy box are rejected;
// throws LeakageError when the rejection budget runs out.
SampleMatrix mdn_sample(const Mdn& model, const Vec& condition, int n,
                        const TruncationPolicy& policy, std::uint64_t seed,
                        SampleStats* stats = nullptr);

// One draw from p(. | conditions.row(i)) for every row, no truncation.
SampleMatrix mdn_sample_each(const Mdn& model, const SampleMatrix& conditions,
                             std::uint64_t seed);

struct FitResult {
  Mdn model;
  double validation_loss = 0.0;
  int epochs = 0;
  bool failed = false;
  std::string diagnostic;
};

using LogDensity = std::function<double(const Vec&)>;

// Maximum likelihood: minimizes the mean of -log p(event_i | condition_i).
// Sets the standardization from these pairs if the model has none yet.
FitResult fit_mle(const Mdn& model, const SampleMatrix& conditions, const SampleMatrix& events,
                  const TrainConfig& cfg);

// Atomic contrastive loss: for each pair the generating event competes with
// atoms-1 events drawn without replacement from the rest of its mini-batch;
// logits are log q(event | condition) - prior_log_density(event).
FitResult fit_atomic(const Mdn& model, const SampleMatrix& conditions,
                     const SampleMatrix& events, const LogDensity& prior_log_density,
                     int atoms, const TrainConfig& cfg);

nlohmann::json mdn_to_json(const Mdn& model);
Mdn mdn_from_json(const nlohmann::json& j);

}  // namespace sbi
