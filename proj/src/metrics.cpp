#include "sbi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sbi {

namespace {

void same_dim(const SampleMatrix& a, const SampleMatrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("metrics: empty sample");
  if (a.cols() != b.cols()) throw DimensionError("metrics: samples have different dimensions");
}

// Mean of f(|a_i - b_j|^2) over all pairs.
template <class F>
double mean_pairwise(const SampleMatrix& a, const SampleMatrix& b, F f) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Vec sq = (b.rowwise() - a.row(i)).rowwise().squaredNorm();
    double row = 0.0;
    for (Eigen::Index j = 0; j < sq.size(); ++j) row += f(sq(j));
    total += row;
  }
  return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

SampleMatrix vstack(const SampleMatrix& a, const SampleMatrix& b) {
  SampleMatrix out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

}  // namespace

double median_heuristic(const SampleMatrix& pooled) {
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(pooled.rows() * (pooled.rows() - 1) / 2));
  for (Eigen::Index i = 0; i + 1 < pooled.rows(); ++i) {
    const auto rest = pooled.bottomRows(pooled.rows() - i - 1);
    const Vec dist = (rest.rowwise() - pooled.row(i)).rowwise().norm();
    for (Eigen::Index j = 0; j < dist.size(); ++j)
      if (dist(j) > 0.0) d.push_back(dist(j));
  }
  if (d.empty()) throw std::invalid_argument("median heuristic: all points are identical");
  // lower/upper middle averaged for an even count
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  const double upper = d[mid];
  if (d.size() % 2 == 1) return upper;
  const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mmd2(const SampleMatrix& a, const SampleMatrix& b) {
  same_dim(a, b);
  if (a.rows() == b.rows() && a == b) return 0.0;
  const double sigma = median_heuristic(vstack(a, b));
  const double scale = -1.0 / (2.0 * sigma * sigma);
  const auto k = [scale](double sq) { return std::exp(scale * sq); };
  const double value = mean_pairwise(a, a, k) + mean_pairwise(b, b, k) - 2.0 * mean_pairwise(a, b, k);
  return std::max(value, 0.0);
}

double ed2(const SampleMatrix& a, const SampleMatrix& b) {
  same_dim(a, b);
  if (a.rows() == b.rows() && a == b) return 0.0;
  const auto dist = [](double sq) { return std::sqrt(sq); };
  const double value =
      2.0 * mean_pairwise(a, b, dist) - mean_pairwise(a, a, dist) - mean_pairwise(b, b, dist);
  return std::max(value, 0.0);
}

double c2st(const SampleMatrix& a, const SampleMatrix& b, std::uint64_t seed, const C2stConfig& cfg) {
  same_dim(a, b);
  const Eigen::Index na = a.rows();
  const Eigen::Index nb = b.rows();
  if (na < 50 || nb < 50) throw std::invalid_argument("c2st: each sample needs at least 50 points");
  if (na > 10 * nb || nb > 10 * na) throw std::invalid_argument("c2st: class imbalance beyond 10:1");
  if (cfg.folds < 2) throw std::invalid_argument("c2st: need at least 2 folds");

  SampleMatrix data = vstack(a, b);
  const Eigen::RowVectorXd mean = data.colwise().mean();
  Eigen::RowVectorXd sd =
      ((data.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(data.rows()))
          .sqrt();
  for (Eigen::Index j = 0; j < sd.size(); ++j)
    if (!(sd(j) > 0.0)) sd(j) = 1.0;
  data = ((data.rowwise() - mean).array().rowwise() / sd.array()).matrix();
  Vec labels(data.rows());
  labels.head(na).setZero();
  labels.tail(nb).setOnes();

  // Stratified folds: shuffle each class separately and deal round-robin.
  Rng rng(derive_seed(seed, 0));
  std::vector<int> fold(static_cast<std::size_t>(data.rows()));
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(cls == 0 ? na : nb));
    std::iota(idx.begin(), idx.end(), cls == 0 ? 0 : na);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < idx.size(); ++i)
      fold[static_cast<std::size_t>(idx[i])] = static_cast<int>(i % static_cast<std::size_t>(cfg.folds));
  }

  const int d = static_cast<int>(data.cols());
  const int width = cfg.width_per_dim * d;
  double accuracy_sum = 0.0;
  for (int k = 0; k < cfg.folds; ++k) {
    std::vector<Eigen::Index> train_idx, test_idx;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      (fold[static_cast<std::size_t>(i)] == k ? test_idx : train_idx).push_back(i);
    SampleMatrix xtr(static_cast<Eigen::Index>(train_idx.size()), d);
    Vec ytr(static_cast<Eigen::Index>(train_idx.size()));
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      xtr.row(static_cast<Eigen::Index>(i)) = data.row(train_idx[i]);
      ytr(static_cast<Eigen::Index>(i)) = labels(train_idx[i]);
    }

    // Binary cross-entropy on the logit output.
    const BatchLoss loss = [&](const Mlp& net, std::span<const std::size_t> batch, Parameters* grad) {
      Mat in(static_cast<Eigen::Index>(batch.size()), d);
      for (std::size_t i = 0; i < batch.size(); ++i) in.row(static_cast<Eigen::Index>(i)) = xtr.row(static_cast<Eigen::Index>(batch[i]));
      const ForwardCache cache = forward_cached(net, in);
      const Mat& z = cache.output();
      Mat up(z.rows(), 1);
      double total = 0.0;
      const double inv = 1.0 / static_cast<double>(batch.size());
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double t = ytr(static_cast<Eigen::Index>(batch[static_cast<std::size_t>(i)]));
        const double v = z(i, 0);
        // log(1 + exp(v)) - t v, computed stably
        total += (v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v))) - t * v;
        const double p = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        up(i, 0) = (p - t) * inv;
      }
      if (grad) {
        grad->set_zero();
        backward_batch(net, cache, up, *grad);
      }
      return total * inv;
    };

    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(k));
    const Mlp init = make_mlp({d, width, width, 1}, Activation::ReLU, derive_seed(seed, 200 + static_cast<std::uint64_t>(k)));
    const TrainResult tr = train(init, train_idx.size(), loss, tc);

    Mat xte(static_cast<Eigen::Index>(test_idx.size()), d);
    for (std::size_t i = 0; i < test_idx.size(); ++i) xte.row(static_cast<Eigen::Index>(i)) = data.row(test_idx[i]);
    const Mat out = forward_batch(tr.net, xte);
    int correct = 0;
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      const double predicted = out(static_cast<Eigen::Index>(i), 0) > 0.0 ? 1.0 : 0.0;
      correct += predicted == labels(test_idx[i]);
    }
    accuracy_sum += static_cast<double>(correct) / static_cast<double>(test_idx.size());
  }
  return accuracy_sum / cfg.folds;
}

MetricTriple metric_triple(const SampleMatrix& a, const SampleMatrix& b, std::uint64_t seed) {
  return {mmd2(a, b), c2st(a, b, seed), ed2(a, b)};
}

double quantile(Vec values, double q) {
  if (values.size() == 0) throw std::invalid_argument("quantile of an empty sample");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile level must be in [0, 1]");
  std::sort(values.data(), values.data() + values.size());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(pos));
  const Eigen::Index hi = std::min<Eigen::Index>(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values(lo) + frac * (values(hi) - values(lo));
}

LocDispReport loc_disp(const SampleMatrix& sample, const Vec& theta_true, const Vec& prior_ranges) {
  const Eigen::Index d = sample.cols();
  if (theta_true.size() != d || prior_ranges.size() != d)
    throw DimensionError("loc_disp: dimension mismatch");
  if (sample.rows() == 0) throw std::invalid_argument("loc_disp: empty sample");
  if (!(prior_ranges.array() > 0.0).all()) throw std::invalid_argument("loc_disp: prior ranges must be positive");
  Vec median(d), mean(d), sd(d), iqr(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Vec col = sample.col(j);
    median(j) = quantile(col, 0.5);
    mean(j) = col.mean();
    const double n = static_cast<double>(col.size());
    sd(j) = n > 1 ? std::sqrt((col.array() - mean(j)).square().sum() / (n - 1.0)) : 0.0;
    iqr(j) = quantile(col, 0.85) - quantile(col, 0.15);
  }
  LocDispReport r;
  r.m1 = ((median - theta_true).array() / prior_ranges.array()).matrix().norm();
  r.m2 = ((mean - theta_true).array() / prior_ranges.array()).matrix().norm();
  r.m3 = (sd.array() / prior_ranges.array()).mean();
  r.m4 = (iqr.array() / prior_ranges.array()).mean();
  return r;
}

}  // namespace sbi
