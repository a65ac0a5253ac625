#include "sbi/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace sbi {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

int tri_size(int d) { return d * (d + 1) / 2; }

double logsumexp(const double* v, int n) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + " contains non-finite values");
}

Vec standardize(const Vec& x, const Vec& mean, const Vec& sd, bool on) {
  if (!on) return x;
  return ((x - mean).array() / sd.array()).matrix();
}

Mat standardize_rows(const SampleMatrix& x, const Vec& mean, const Vec& sd, bool on) {
  Mat out = x;
  if (on) {
    out.rowwise() -= mean.transpose();
    out.array().rowwise() /= sd.transpose().array();
  }
  return out;
}

double log_jacobian(const Mdn& m) {
  return m.standardized ? m.event_sd.array().log().sum() : 0.0;
}

void set_standardization(Mdn& m, const SampleMatrix& conditions, const SampleMatrix& events) {
  auto stats = [](const SampleMatrix& x, Vec& mean, Vec& sd) {
    const double n = static_cast<double>(x.rows());
    mean = x.colwise().mean().transpose();
    sd.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double var = (x.col(j).array() - mean(j)).square().sum() / std::max(1.0, n - 1.0);
      const double s = std::sqrt(var);
      sd(j) = (s > 1e-8 * (1.0 + std::abs(mean(j)))) ? s : 1.0;
    }
  };
  stats(conditions, m.cond_mean, m.cond_sd);
  stats(events, m.event_mean, m.event_sd);
  m.standardized = true;
}

void check_pairs(const Mdn& m, const SampleMatrix& conditions, const SampleMatrix& events) {
  if (conditions.rows() != events.rows())
    throw DimensionError("pair count mismatch between conditions and events");
  if (conditions.cols() != m.cond_dim || events.cols() != m.event_dim)
    throw DimensionError("pair dimensions do not match the model");
  if (conditions.rows() < 2) throw std::invalid_argument("fitting needs at least 2 pairs");
  if (!conditions.allFinite() || !events.allFinite())
    throw std::invalid_argument("training pairs contain non-finite values");
}

// Draws one standardized-space sample from a decoded head.
void sample_head(const double* head, int K, int d, Rng& rng, double* out,
                 std::vector<double>& probs) {
  probs.assign(head, head + K);
  const double lse = logsumexp(probs.data(), K);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  int k = K - 1;
  for (int i = 0; i < K; ++i) {
    u -= std::exp(head[i] - lse);
    if (u <= 0.0) {
      k = i;
      break;
    }
  }
  const double* mu = head + K + k * d;
  const double* chol = head + K + K * d + k * tri_size(d);
  std::normal_distribution<double> normal(0.0, 1.0);
  double eps[64];
  std::vector<double> eps_heap;
  double* e = eps;
  if (d > 64) {
    eps_heap.resize(static_cast<std::size_t>(d));
    e = eps_heap.data();
  }
  for (int i = 0; i < d; ++i) e[i] = normal(rng);
  int idx = 0;
  for (int i = 0; i < d; ++i) {
    double v = mu[i];
    for (int j = 0; j <= i; ++j, ++idx) {
      const double l = (i == j) ? std::exp(chol[idx]) : chol[idx];
      v += l * e[j];
    }
    out[i] = v;
  }
}

}  // namespace

int mdn_head_size(int components, int event_dim) {
  return components * (1 + event_dim + tri_size(event_dim));
}

int Mdn::head_size() const { return mdn_head_size(components, event_dim); }

Mdn make_mdn(int cond_dim, int event_dim, const MdnConfig& cfg, std::uint64_t seed) {
  if (cond_dim < 1 || event_dim < 1 || cfg.components < 1)
    throw std::invalid_argument("mdn dimensions and component count must be positive");
  std::vector<int> dims;
  dims.push_back(cond_dim);
  for (int h : cfg.hidden) dims.push_back(h);
  dims.push_back(mdn_head_size(cfg.components, event_dim));
  Mdn m;
  m.trunk = make_mlp(std::move(dims), cfg.activation, seed);
  m.components = cfg.components;
  m.event_dim = event_dim;
  m.cond_dim = cond_dim;
  m.cond_mean = Vec::Zero(cond_dim);
  m.cond_sd = Vec::Ones(cond_dim);
  m.event_mean = Vec::Zero(event_dim);
  m.event_sd = Vec::Ones(event_dim);
  // Spread the component means (standardized space) so components start apart.
  Rng rng(derive_seed(seed, 0x6d65616e));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec& out_bias = m.trunk.params.biases.back();
  for (int i = 0; i < cfg.components * event_dim; ++i) out_bias(cfg.components + i) = normal(rng);
  return m;
}

Mdn make_constant_mdn(int cond_dim, int event_dim, int components, const Vec& head,
                      const MdnConfig& cfg) {
  MdnConfig c = cfg;
  c.components = components;
  Mdn m = make_mdn(cond_dim, event_dim, c, 0);
  if (head.size() != m.head_size()) throw DimensionError("head size does not match mixture shape");
  m.trunk.params.set_zero();
  m.trunk.params.biases.back() = head;
  return m;
}

Vec pack_mixture_head(const Vec& logits, const Mat& means, const std::vector<Mat>& chol_factors) {
  const int K = static_cast<int>(logits.size());
  const int d = static_cast<int>(means.cols());
  if (means.rows() != K || static_cast<int>(chol_factors.size()) != K)
    throw DimensionError("mixture parameter shapes disagree");
  Vec head(mdn_head_size(K, d));
  head.head(K) = logits;
  for (int k = 0; k < K; ++k) head.segment(K + k * d, d) = means.row(k).transpose();
  int idx = K + K * d;
  for (int k = 0; k < K; ++k) {
    const Mat& L = chol_factors[static_cast<std::size_t>(k)];
    if (L.rows() != d || L.cols() != d) throw DimensionError("cholesky factor must be d x d");
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) {
        if (i == j) {
          if (!(L(i, i) > 0.0)) throw std::invalid_argument("cholesky diagonal must be positive");
          head(idx++) = std::log(L(i, i));
        } else {
          head(idx++) = L(i, j);
        }
      }
  }
  return head;
}

double mixture_head_log_prob(const double* head, int K, int d, const double* event, double* grad) {
  const int tri = tri_size(d);
  const double* logits = head;
  const double* means = head + K;
  const double* chols = head + K + K * d;

  // Per-component scratch: z = L^{-1}(x - mu) and w = L^{-T} z.
  thread_local std::vector<double> scratch;
  scratch.resize(static_cast<std::size_t>(K) * (2 * d + 2));
  double* comp_lp = scratch.data();  // log pi_k + log N_k
  double* log_pi = comp_lp + K;
  double* zbuf = log_pi + K;
  double* wbuf = zbuf + K * d;

  const double lse_logits = logsumexp(logits, K);
  for (int k = 0; k < K; ++k) {
    log_pi[k] = logits[k] - lse_logits;
    const double* mu = means + k * d;
    const double* L = chols + k * tri;
    double* z = zbuf + k * d;
    double logdet = 0.0;
    double quad = 0.0;
    // forward substitution, row-major lower triangle with log diagonal
    for (int i = 0; i < d; ++i) {
      const double* row = L + i * (i + 1) / 2;
      double s = event[i] - mu[i];
      for (int j = 0; j < i; ++j) s -= row[j] * z[j];
      const double diag = std::exp(row[i]);
      z[i] = s / diag;
      logdet += row[i];
      quad += z[i] * z[i];
    }
    comp_lp[k] = log_pi[k] - 0.5 * d * kLog2Pi - logdet - 0.5 * quad;
  }
  const double lp = logsumexp(comp_lp, K);
  if (!grad) return lp;

  for (int k = 0; k < K; ++k) {
    const double gamma = std::exp(comp_lp[k] - lp);
    grad[k] = gamma - std::exp(log_pi[k]);
    const double* L = chols + k * tri;
    const double* z = zbuf + k * d;
    double* w = wbuf + k * d;
    // back substitution: L^T w = z
    for (int i = d - 1; i >= 0; --i) {
      double s = z[i];
      for (int r = i + 1; r < d; ++r) s -= L[r * (r + 1) / 2 + i] * w[r];
      w[i] = s / std::exp(L[i * (i + 1) / 2 + i]);
    }
    double* gmu = grad + K + k * d;
    for (int i = 0; i < d; ++i) gmu[i] = gamma * w[i];
    double* gL = grad + K + K * d + k * tri;
    for (int i = 0; i < d; ++i) {
      const int base = i * (i + 1) / 2;
      for (int j = 0; j < i; ++j) gL[base + j] = gamma * w[i] * z[j];
      gL[base + i] = gamma * (w[i] * z[i] * std::exp(L[base + i]) - 1.0);
    }
  }
  return lp;
}

MixtureParams mdn_mixture(const Mdn& model, const Vec& condition) {
  if (condition.size() != model.cond_dim) throw DimensionError("condition length mismatch");
  const Vec head =
      forward(model.trunk, standardize(condition, model.cond_mean, model.cond_sd, model.standardized));
  const int K = model.components;
  const int d = model.event_dim;
  MixtureParams p;
  p.weights = head.head(K);
  p.weights = (p.weights.array() - p.weights.maxCoeff()).exp().matrix();
  p.weights /= p.weights.sum();
  p.means.resize(K, d);
  int idx = K + K * d;
  for (int k = 0; k < K; ++k) {
    Vec mu = head.segment(K + k * d, d);
    Mat L = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j, ++idx) L(i, j) = (i == j) ? std::exp(head(idx)) : head(idx);
    if (model.standardized) {
      mu = model.event_mean + (mu.array() * model.event_sd.array()).matrix();
      L = model.event_sd.asDiagonal() * L;
    }
    p.means.row(k) = mu.transpose();
    p.chol_factors.push_back(std::move(L));
  }
  return p;
}

double mdn_log_prob(const Mdn& model, const Vec& event, const Vec& condition) {
  if (event.size() != model.event_dim || condition.size() != model.cond_dim)
    throw DimensionError("mdn_log_prob: event or condition length mismatch");
  check_finite(event, "event");
  check_finite(condition, "condition");
  const Vec head =
      forward(model.trunk, standardize(condition, model.cond_mean, model.cond_sd, model.standardized));
  const Vec e = standardize(event, model.event_mean, model.event_sd, model.standardized);
  return mixture_head_log_prob(head.data(), model.components, model.event_dim, e.data(), nullptr) -
         log_jacobian(model);
}

Vec mdn_log_prob_batch(const Mdn& model, const SampleMatrix& events,
                       const SampleMatrix& conditions) {
  if (events.cols() != model.event_dim || conditions.cols() != model.cond_dim)
    throw DimensionError("mdn_log_prob_batch: dimension mismatch");
  if (conditions.rows() != 1 && conditions.rows() != events.rows())
    throw DimensionError("mdn_log_prob_batch: conditions must have 1 row or one per event");
  if (!events.allFinite() || !conditions.allFinite())
    throw std::invalid_argument("mdn_log_prob_batch: non-finite input");
  const Mat c = standardize_rows(conditions, model.cond_mean, model.cond_sd, model.standardized);
  const Mat e = standardize_rows(events, model.event_mean, model.event_sd, model.standardized);
  const Mat heads = forward_batch(model.trunk, c);
  const double jac = log_jacobian(model);
  Vec out(events.rows());
  Vec head(model.head_size());
  Vec ev(model.event_dim);
  for (Eigen::Index i = 0; i < events.rows(); ++i) {
    if (i == 0 || heads.rows() > 1) head = heads.row(heads.rows() > 1 ? i : 0).transpose();
    ev = e.row(i).transpose();
    out(i) = mixture_head_log_prob(head.data(), model.components, model.event_dim, ev.data(),
                                   nullptr) -
             jac;
  }
  return out;
}

bool BoxBounds::contains(const Eigen::Ref<const Vec>& x) const {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x(i) >= low(i) && x(i) <= high(i))) return false;
  return true;
}

SampleMatrix mdn_sample(const Mdn& model, const Vec& condition, int n,
                        const TruncationPolicy& policy, std::uint64_t seed, SampleStats* stats) {
  if (n < 1) throw std::invalid_argument("mdn_sample: n must be >= 1");
  if (condition.size() != model.cond_dim) throw DimensionError("mdn_sample: condition length");
  check_finite(condition, "condition");
  if (policy.box) {
    const auto& b = *policy.box;
    if (b.low.size() != model.event_dim || b.high.size() != model.event_dim)
      throw DimensionError("truncation box dimension mismatch");
    for (int i = 0; i < model.event_dim; ++i)
      if (!(b.low(i) < b.high(i))) throw std::invalid_argument("truncation box needs low < high");
  }
  const Vec head =
      forward(model.trunk, standardize(condition, model.cond_mean, model.cond_sd, model.standardized));
  const int d = model.event_dim;
  Rng rng(seed);
  SampleMatrix out(n, d);
  std::vector<double> probs;
  Vec draw(d);
  const long budget = static_cast<long>(policy.max_attempts_factor) * n;
  long attempts = 0;
  long rejected = 0;
  int filled = 0;
  while (filled < n) {
    if (attempts >= budget) {
      std::string cond;
      for (int i = 0; i < condition.size(); ++i)
        cond += (i ? "," : "") + std::to_string(condition(i));
      throw LeakageError("mdn_sample: rejection budget of " + std::to_string(budget) +
                         " draws exhausted with " + std::to_string(filled) + "/" +
                         std::to_string(n) + " accepted at condition (" + cond + ")");
    }
    ++attempts;
    sample_head(head.data(), model.components, d, rng, draw.data(), probs);
    if (model.standardized)
      draw = model.event_mean + (draw.array() * model.event_sd.array()).matrix();
    if (policy.box && !policy.box->contains(draw)) {
      ++rejected;
      continue;
    }
    out.row(filled++) = draw.transpose();
  }
  if (stats) {
    stats->accepted += n;
    stats->rejected += rejected;
  }
  return out;
}

SampleMatrix mdn_sample_each(const Mdn& model, const SampleMatrix& conditions,
                             std::uint64_t seed) {
  if (conditions.cols() != model.cond_dim) throw DimensionError("mdn_sample_each: condition dim");
  if (!conditions.allFinite()) throw std::invalid_argument("mdn_sample_each: non-finite condition");
  const Mat c = standardize_rows(conditions, model.cond_mean, model.cond_sd, model.standardized);
  const Mat heads = forward_batch(model.trunk, c);
  const int d = model.event_dim;
  Rng rng(seed);
  SampleMatrix out(conditions.rows(), d);
  std::vector<double> probs;
  Vec head(model.head_size());
  Vec draw(d);
  for (Eigen::Index i = 0; i < conditions.rows(); ++i) {
    head = heads.row(i).transpose();
    sample_head(head.data(), model.components, d, rng, draw.data(), probs);
    if (model.standardized)
      draw = model.event_mean + (draw.array() * model.event_sd.array()).matrix();
    out.row(i) = draw.transpose();
  }
  return out;
}

namespace {

FitResult finish(const Mdn& base, TrainResult&& tr) {
  FitResult r;
  r.model = base;
  r.model.trunk = std::move(tr.net);
  r.validation_loss = tr.validation_loss;
  r.epochs = tr.epochs;
  r.failed = tr.failed;
  r.diagnostic = std::move(tr.diagnostic);
  return r;
}

}  // namespace

FitResult fit_mle(const Mdn& model, const SampleMatrix& conditions, const SampleMatrix& events,
                  const TrainConfig& cfg) {
  check_pairs(model, conditions, events);
  Mdn m = model;
  if (!m.standardized) set_standardization(m, conditions, events);
  const Mat c = standardize_rows(conditions, m.cond_mean, m.cond_sd, true);
  const Mat e = standardize_rows(events, m.event_mean, m.event_sd, true);
  const int K = m.components;
  const int d = m.event_dim;
  const int P = m.head_size();

  BatchLoss loss = [&](const Mlp& net, std::span<const std::size_t> batch, Parameters* grad) {
    const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
    Mat in(B, c.cols());
    for (Eigen::Index b = 0; b < B; ++b) in.row(b) = c.row(static_cast<Eigen::Index>(batch[b]));
    ForwardCache cache = forward_cached(net, in);
    const Mat& heads = cache.output();
    Mat upstream(grad ? B : 0, P);
    Vec head(P), g(P), ev(d);
    double total = 0.0;
    for (Eigen::Index b = 0; b < B; ++b) {
      head = heads.row(b).transpose();
      ev = e.row(static_cast<Eigen::Index>(batch[b])).transpose();
      total += mixture_head_log_prob(head.data(), K, d, ev.data(), grad ? g.data() : nullptr);
      if (grad) upstream.row(b) = -g.transpose() / static_cast<double>(B);
    }
    if (grad) {
      grad->set_zero();
      backward_batch(net, cache, upstream, *grad);
    }
    return -total / static_cast<double>(B);
  };
  return finish(m, train(m.trunk, static_cast<std::size_t>(conditions.rows()), loss, cfg));
}

FitResult fit_atomic(const Mdn& model, const SampleMatrix& conditions,
                     const SampleMatrix& events, const LogDensity& prior_log_density, int atoms,
                     const TrainConfig& cfg) {
  check_pairs(model, conditions, events);
  if (atoms < 2) throw std::invalid_argument("fit_atomic: need at least 2 atoms");
  if (atoms > cfg.batch_size)
    throw std::invalid_argument("fit_atomic: " + std::to_string(atoms) +
                                " atoms exceed the batch size " + std::to_string(cfg.batch_size));
  Mdn m = model;
  if (!m.standardized) set_standardization(m, conditions, events);
  const Mat c = standardize_rows(conditions, m.cond_mean, m.cond_sd, true);
  const Mat e = standardize_rows(events, m.event_mean, m.event_sd, true);
  const Eigen::Index n = conditions.rows();
  Vec prior_lp(n);
  for (Eigen::Index i = 0; i < n; ++i) prior_lp(i) = prior_log_density(events.row(i).transpose());

  const int K = m.components;
  const int d = m.event_dim;
  const int P = m.head_size();
  Rng train_rng(derive_seed(cfg.seed, 77));
  const std::uint64_t eval_seed = derive_seed(cfg.seed, 78);

  BatchLoss loss = [&](const Mlp& net, std::span<const std::size_t> batch, Parameters* grad) {
    const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
    const int M = static_cast<int>(std::min<Eigen::Index>(atoms, B));
    Rng eval_rng(eval_seed);
    Rng& rng = grad ? train_rng : eval_rng;

    Mat in(B, c.cols());
    for (Eigen::Index b = 0; b < B; ++b) in.row(b) = c.row(static_cast<Eigen::Index>(batch[b]));
    ForwardCache cache = forward_cached(net, in);
    const Mat& heads = cache.output();
    Mat upstream(grad ? B : 0, P);

    std::vector<Eigen::Index> pool(static_cast<std::size_t>(B));
    std::vector<Eigen::Index> chosen(static_cast<std::size_t>(M));
    std::vector<double> logits(static_cast<std::size_t>(M));
    Mat atom_grads(grad ? M : 0, P);
    Vec head(P), g(P), ev(d);
    double total = 0.0;
    for (Eigen::Index b = 0; b < B; ++b) {
      // atom 0 is the generating event; the others come from the rest of the batch
      chosen[0] = b;
      if (M > 1) {
        std::iota(pool.begin(), pool.end(), Eigen::Index{0});
        std::swap(pool[static_cast<std::size_t>(b)], pool.back());
        const std::size_t avail = static_cast<std::size_t>(B) - 1;
        for (int j = 1; j < M; ++j) {
          const std::size_t pick =
              static_cast<std::size_t>(j - 1) +
              std::uniform_int_distribution<std::size_t>(0, avail - static_cast<std::size_t>(j))(rng);
          std::swap(pool[static_cast<std::size_t>(j - 1)], pool[pick]);
          chosen[static_cast<std::size_t>(j)] = pool[static_cast<std::size_t>(j - 1)];
        }
      }
      head = heads.row(b).transpose();
      for (int j = 0; j < M; ++j) {
        const Eigen::Index item = static_cast<Eigen::Index>(batch[static_cast<std::size_t>(chosen[static_cast<std::size_t>(j)])]);
        ev = e.row(item).transpose();
        const double lq = mixture_head_log_prob(head.data(), K, d, ev.data(), grad ? g.data() : nullptr);
        logits[static_cast<std::size_t>(j)] = lq - prior_lp(item);
        if (grad) atom_grads.row(j) = g.transpose();
      }
      const double lse = logsumexp(logits.data(), M);
      total += -(logits[0] - lse);
      if (grad) {
        // d(-log softmax_0)/d(head) = -sum_j (delta_j0 - p_j) dlq_j/d(head)
        Vec up = -atom_grads.row(0).transpose();
        for (int j = 0; j < M; ++j)
          up += std::exp(logits[static_cast<std::size_t>(j)] - lse) * atom_grads.row(j).transpose();
        upstream.row(b) = up.transpose() / static_cast<double>(B);
      }
    }
    if (grad) {
      grad->set_zero();
      backward_batch(net, cache, upstream, *grad);
    }
    return total / static_cast<double>(B);
  };
  return finish(m, train(m.trunk, static_cast<std::size_t>(n), loss, cfg));
}

nlohmann::json mdn_to_json(const Mdn& m) {
  nlohmann::json j;
  j["format"] = "sbi-mdn";
  j["version"] = 1;
  j["dims"] = m.trunk.dims;
  j["activation"] = m.trunk.hidden == Activation::Tanh ? "tanh" : "relu";
  j["components"] = m.components;
  j["event_dim"] = m.event_dim;
  j["cond_dim"] = m.cond_dim;
  std::vector<double> flat;
  flat.reserve(m.trunk.params.size());
  for (std::size_t l = 0; l < m.trunk.num_layers(); ++l) {
    const Mat& w = m.trunk.params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index col = 0; col < w.cols(); ++col) flat.push_back(w(r, col));
    const Vec& b = m.trunk.params.biases[l];
    flat.insert(flat.end(), b.data(), b.data() + b.size());
  }
  j["params"] = flat;
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  j["standardized"] = m.standardized;
  j["cond_mean"] = vec(m.cond_mean);
  j["cond_sd"] = vec(m.cond_sd);
  j["event_mean"] = vec(m.event_mean);
  j["event_sd"] = vec(m.event_sd);
  return j;
}

Mdn mdn_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "sbi-mdn") throw Error("not an sbi-mdn blob");
  Mdn m;
  const auto dims = j.at("dims").get<std::vector<int>>();
  const Activation act = j.at("activation").get<std::string>() == "tanh" ? Activation::Tanh
                                                                          : Activation::ReLU;
  m.trunk = make_zero_mlp(dims, act);
  m.components = j.at("components").get<int>();
  m.event_dim = j.at("event_dim").get<int>();
  m.cond_dim = j.at("cond_dim").get<int>();
  if (dims.front() != m.cond_dim || dims.back() != mdn_head_size(m.components, m.event_dim))
    throw Error("sbi-mdn blob: dims inconsistent with mixture shape");
  const auto flat = j.at("params").get<std::vector<double>>();
  if (flat.size() != m.trunk.params.size()) throw Error("sbi-mdn blob: parameter count mismatch");
  std::size_t idx = 0;
  for (std::size_t l = 0; l < m.trunk.num_layers(); ++l) {
    Mat& w = m.trunk.params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index col = 0; col < w.cols(); ++col) w(r, col) = flat[idx++];
    Vec& b = m.trunk.params.biases[l];
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = flat[idx++];
  }
  auto vec = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Vec(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  m.standardized = j.at("standardized").get<bool>();
  m.cond_mean = vec(j.at("cond_mean"));
  m.cond_sd = vec(j.at("cond_sd"));
  m.event_mean = vec(j.at("event_mean"));
  m.event_sd = vec(j.at("event_sd"));
  return m;
}

}  // namespace sbi
