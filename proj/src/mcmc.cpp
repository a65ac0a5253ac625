#include "sbi/mcmc.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace sbi {

SampleMatrix MhResult::pooled() const {
  Eigen::Index rows = 0;
  for (const auto& c : chains) rows += c.rows();
  const Eigen::Index d = chains.empty() ? 0 : chains.front().cols();
  SampleMatrix out(rows, d);
  Eigen::Index r = 0;
  for (const auto& c : chains) {
    out.middleRows(r, c.rows()) = c;
    r += c.rows();
  }
  return out;
}

SampleMatrix MhResult::take(int n) const {
  const SampleMatrix all = pooled();
  if (n < 1 || all.rows() < n)
    throw MhError("requested " + std::to_string(n) + " draws but the chains hold " +
                  std::to_string(all.rows()));
  SampleMatrix out(n, all.cols());
  const double stride = static_cast<double>(all.rows()) / n;
  for (int i = 0; i < n; ++i)
    out.row(i) = all.row(static_cast<Eigen::Index>(std::floor(i * stride)));
  return out;
}

Vec split_rhat(const std::vector<SampleMatrix>& chains) {
  if (chains.empty()) return {};
  const Eigen::Index len = chains.front().rows() / 2;
  const Eigen::Index d = chains.front().cols();
  Vec out = Vec::Constant(d, std::numeric_limits<double>::quiet_NaN());
  if (len < 2) return out;
  std::vector<SampleMatrix> halves;
  for (const auto& c : chains) {
    halves.push_back(c.topRows(len));
    halves.push_back(c.middleRows(len, len));
  }
  const double m = static_cast<double>(halves.size());
  const double n = static_cast<double>(len);
  for (Eigen::Index j = 0; j < d; ++j) {
    Vec means(halves.size());
    double w = 0.0;
    for (std::size_t c = 0; c < halves.size(); ++c) {
      const auto col = halves[c].col(j);
      means(static_cast<Eigen::Index>(c)) = col.mean();
      w += (col.array() - col.mean()).square().sum() / (n - 1.0);
    }
    w /= m;
    const double b = n * (means.array() - means.mean()).square().sum() / (m - 1.0);
    const double var_plus = (n - 1.0) / n * w + b / n;
    out(j) = (w > 0.0) ? std::sqrt(var_plus / w) : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

MhResult rw_metropolis(const LogTarget& log_target, const SampleMatrix& init, const MhConfig& cfg) {
  const Eigen::Index d = init.cols();
  if (cfg.chains < 1 || cfg.thinning < 1 || cfg.burn_in < 0 || cfg.steps <= cfg.burn_in)
    throw std::invalid_argument("rw_metropolis: need chains >= 1, thinning >= 1, steps > burn_in");
  if (cfg.proposal_scale.size() != d)
    throw DimensionError("rw_metropolis: proposal scale length must match the state dimension");
  if (init.rows() != 1 && init.rows() != cfg.chains)
    throw DimensionError("rw_metropolis: init needs one row or one row per chain");

  MhResult result;
  long accepted_total = 0;
  long proposed_total = 0;
  const double target_rate = 0.25;
  const int window = 50;

  for (int c = 0; c < cfg.chains; ++c) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(c)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Vec x = init.row(init.rows() == 1 ? 0 : c).transpose();
    double lp = log_target(x);
    if (!std::isfinite(lp))
      throw MhError("rw_metropolis: log target is not finite at the initial point of chain " +
                    std::to_string(c));

    Mat shape = cfg.proposal_scale.asDiagonal();
    double log_scale = 0.0;
    const int shape_from = cfg.burn_in / 4;
    const int shape_at = cfg.burn_in / 2;
    std::vector<Vec> shape_draws;

    const int kept = (cfg.steps - cfg.burn_in) / cfg.thinning;
    SampleMatrix draws(kept, d);
    int filled = 0;
    long burn_accepted = 0;
    int window_accepted = 0;
    Vec eps(d), proposal(d);

    for (int step = 0; step < cfg.steps; ++step) {
      for (Eigen::Index i = 0; i < d; ++i) eps(i) = normal(rng);
      proposal = x + std::exp(log_scale) * (shape * eps);
      const double lp_new = log_target(proposal);
      bool accept = false;
      if (std::isfinite(lp_new)) {
        const double log_ratio = lp_new - lp;
        accept = log_ratio >= 0.0 || std::log(unif(rng)) < log_ratio;
      }
      if (accept) {
        x = proposal;
        lp = lp_new;
      }
      if (step < cfg.burn_in) {
        burn_accepted += accept;
        if (cfg.adapt) {
          window_accepted += accept;
          if ((step + 1) % window == 0) {
            const double rate = static_cast<double>(window_accepted) / window;
            log_scale += 1.5 * (rate - target_rate);
            log_scale = std::clamp(log_scale, -30.0, 10.0);
            window_accepted = 0;
          }
          if (step >= shape_from && step < shape_at) shape_draws.push_back(x);
          if (step + 1 == shape_at && shape_draws.size() > static_cast<std::size_t>(4 * d)) {
            Vec mean = Vec::Zero(d);
            for (const auto& s : shape_draws) mean += s;
            mean /= static_cast<double>(shape_draws.size());
            Mat cov = Mat::Zero(d, d);
            for (const auto& s : shape_draws) cov += (s - mean) * (s - mean).transpose();
            cov /= static_cast<double>(shape_draws.size() - 1);
            cov *= 2.38 * 2.38 / static_cast<double>(d);
            const double jitter = 1e-10 * (1.0 + cov.diagonal().cwiseAbs().maxCoeff());
            cov.diagonal().array() += jitter;
            Eigen::LLT<Mat> llt(cov);
            if (llt.info() == Eigen::Success && cov.diagonal().maxCoeff() > 0.0) {
              shape = llt.matrixL();
              log_scale = 0.0;
            }
            shape_draws.clear();
          }
        }
      } else {
        ++proposed_total;
        accepted_total += accept;
        if ((step - cfg.burn_in) % cfg.thinning == 0 && filled < kept) draws.row(filled++) = x.transpose();
      }
    }
    if (cfg.burn_in > 0 && burn_accepted == 0)
      throw MhError("rw_metropolis: no proposal accepted during burn-in of chain " +
                    std::to_string(c) + "; rescale the proposal");
    result.chains.push_back(draws.topRows(filled));
  }
  result.acceptance_rate =
      proposed_total ? static_cast<double>(accepted_total) / static_cast<double>(proposed_total) : 0.0;
  if (cfg.chains >= 2) {
    result.split_rhat = split_rhat(result.chains);
    const double worst = result.split_rhat.maxCoeff();
    if (!(worst < 1.05))
      result.warnings.push_back("split R-hat " + std::to_string(worst) + " exceeds 1.05");
  }
  if (result.acceptance_rate < 0.01)
    result.warnings.push_back("acceptance rate " + std::to_string(result.acceptance_rate) +
                              " is very low");
  return result;
}

}  // namespace sbi
