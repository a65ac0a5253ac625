#include "sbi/nn_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sbi {

Parameters Parameters::zeros_like() const {
  Parameters out;
  out.weights.reserve(weights.size());
  out.biases.reserve(biases.size());
  for (const auto& w : weights) out.weights.push_back(Mat::Zero(w.rows(), w.cols()));
  for (const auto& b : biases) out.biases.push_back(Vec::Zero(b.size()));
  return out;
}

void Parameters::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

void Parameters::add_scaled(const Parameters& other, double s) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += s * other.weights[l];
    biases[l] += s * other.biases[l];
  }
}

void Parameters::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
}

double Parameters::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weights) s += w.squaredNorm();
  for (const auto& b : biases) s += b.squaredNorm();
  return s;
}

bool Parameters::all_finite() const {
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

std::size_t Parameters::size() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
  return n;
}

namespace {

void check_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) throw DimensionError("mlp needs at least input and output widths");
  for (int d : dims)
    if (d <= 0) throw DimensionError("mlp layer widths must be positive");
}

void apply_activation(Mat& z, Activation act) {
  switch (act) {
    case Activation::ReLU:
      z = z.cwiseMax(0.0);
      break;
    case Activation::Tanh:
      z = z.array().tanh().matrix();
      break;
  }
}

// Multiplies `delta` in place by the activation derivative, expressed through
// the post-activation value `a`.
void apply_activation_derivative(Mat& delta, const Mat& a, Activation act) {
  switch (act) {
    case Activation::ReLU:
      delta = (a.array() > 0.0).select(delta, 0.0);
      break;
    case Activation::Tanh:
      delta.array() *= 1.0 - a.array().square();
      break;
  }
}

}  // namespace

Mlp make_zero_mlp(std::vector<int> dims, Activation hidden) {
  check_dims(dims);
  Mlp net;
  net.dims = std::move(dims);
  net.hidden = hidden;
  for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
    net.params.weights.push_back(Mat::Zero(net.dims[l + 1], net.dims[l]));
    net.params.biases.push_back(Vec::Zero(net.dims[l + 1]));
  }
  return net;
}

Mlp make_mlp(std::vector<int> dims, Activation hidden, std::uint64_t seed) {
  Mlp net = make_zero_mlp(std::move(dims), hidden);
  Rng rng(seed);
  for (auto& w : net.params.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
  }
  return net;
}

ForwardCache forward_cached(const Mlp& net, const Mat& inputs) {
  if (inputs.cols() != net.input_dim())
    throw DimensionError("forward: input has " + std::to_string(inputs.cols()) +
                         " columns, net expects " + std::to_string(net.input_dim()));
  ForwardCache cache;
  cache.activations.reserve(net.num_layers() + 1);
  cache.activations.push_back(inputs);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Mat z = cache.activations.back() * net.params.weights[l].transpose();
    z.rowwise() += net.params.biases[l].transpose();
    if (l + 1 < net.num_layers()) apply_activation(z, net.hidden);
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

Mat forward_batch(const Mlp& net, const Mat& inputs) {
  if (inputs.cols() != net.input_dim())
    throw DimensionError("forward: input has " + std::to_string(inputs.cols()) +
                         " columns, net expects " + std::to_string(net.input_dim()));
  Mat a = inputs;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Mat z = a * net.params.weights[l].transpose();
    z.rowwise() += net.params.biases[l].transpose();
    if (l + 1 < net.num_layers()) apply_activation(z, net.hidden);
    a = std::move(z);
  }
  return a;
}

Vec forward(const Mlp& net, const Vec& input) {
  if (input.size() != net.input_dim())
    throw DimensionError("forward: input length " + std::to_string(input.size()) +
                         " != " + std::to_string(net.input_dim()));
  Vec a = input;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Vec z = net.params.weights[l] * a + net.params.biases[l];
    if (l + 1 < net.num_layers()) {
      if (net.hidden == Activation::ReLU)
        z = z.cwiseMax(0.0);
      else
        z = z.array().tanh().matrix();
    }
    a = std::move(z);
  }
  return a;
}

void backward_batch(const Mlp& net, const ForwardCache& cache, const Mat& upstream,
                    Parameters& grad) {
  const std::size_t layers = net.num_layers();
  if (cache.activations.size() != layers + 1 || upstream.cols() != net.output_dim() ||
      upstream.rows() != cache.activations.front().rows())
    throw DimensionError("backward: upstream gradient does not match the forward pass");
  if (grad.weights.size() != layers) grad = net.params.zeros_like();

  Mat delta = upstream;
  for (std::size_t l = layers; l-- > 0;) {
    const Mat& a_in = cache.activations[l];
    grad.weights[l].noalias() += delta.transpose() * a_in;
    grad.biases[l] += delta.colwise().sum().transpose();
    if (l == 0) break;
    Mat next = delta * net.params.weights[l];
    apply_activation_derivative(next, a_in, net.hidden);
    delta = std::move(next);
  }
}

Parameters backward(const Mlp& net, const Vec& input, const Vec& upstream) {
  if (input.size() != net.input_dim() || upstream.size() != net.output_dim())
    throw DimensionError("backward: input or upstream length mismatch");
  const ForwardCache cache = forward_cached(net, input.transpose());
  Parameters grad = net.params.zeros_like();
  backward_batch(net, cache, upstream.transpose(), grad);
  return grad;
}

AdamState::AdamState(const Parameters& shape, double step)
    : first_moment(shape.zeros_like()), second_moment(shape.zeros_like()), step_size(step) {}

void adam_step(AdamState& state, Parameters& params, const Parameters& grads) {
  if (params.weights.size() != grads.weights.size())
    throw DimensionError("adam_step: gradient layer count mismatch");
  if (state.first_moment.weights.size() != params.weights.size()) {
    state.first_moment = params.zeros_like();
    state.second_moment = params.zeros_like();
  }
  ++state.step;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const double lr = state.step_size;
  const double eps = state.epsilon;

  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    if (p.rows() != g.rows() || p.cols() != g.cols())
      throw DimensionError("adam_step: gradient shape mismatch");
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseAbs2();
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l], state.first_moment.weights[l], state.second_moment.weights[l],
           grads.weights[l]);
    update(params.biases[l], state.first_moment.biases[l], state.second_moment.biases[l],
           grads.biases[l]);
  }
}

Split train_validation_split(std::size_t n_items, double validation_fraction,
                             std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  std::size_t n_val =
      static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(n_items)));
  n_val = std::max<std::size_t>(n_val, 1);
  if (n_items < 2 || n_val >= n_items)
    throw std::invalid_argument("dataset of " + std::to_string(n_items) +
                                " items cannot be split into train and validation parts");
  std::vector<std::size_t> order(n_items);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Split split;
  split.train.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
  split.validation.assign(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
  return split;
}

namespace {

double evaluate(const Mlp& net, const std::vector<std::size_t>& items, std::size_t chunk,
                const BatchLoss& loss) {
  double total = 0.0;
  for (std::size_t start = 0; start < items.size(); start += chunk) {
    const std::size_t len = std::min(chunk, items.size() - start);
    const double l = loss(net, std::span<const std::size_t>(items.data() + start, len), nullptr);
    total += l * static_cast<double>(len);
  }
  return total / static_cast<double>(items.size());
}

}  // namespace

TrainResult train(const Mlp& init, std::size_t n_items, const BatchLoss& loss,
                  const TrainConfig& cfg) {
  if (n_items == 0) throw std::invalid_argument("train: empty dataset");
  if (cfg.batch_size < 1 || cfg.max_epochs < 0 || cfg.patience < 0)
    throw std::invalid_argument("train: invalid configuration");

  Split split = train_validation_split(n_items, cfg.validation_fraction, cfg.seed);
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  TrainResult result;
  result.net = init;
  Mlp net = init;
  AdamState adam(net.params, cfg.step_size);
  Parameters grad = net.params.zeros_like();
  Rng rng(derive_seed(cfg.seed, 1));

  double best = evaluate(net, split.validation, batch, loss);
  result.validation_history.push_back(best);
  if (!std::isfinite(best)) best = std::numeric_limits<double>::infinity();
  result.validation_loss = best;

  int stale = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(split.train.begin(), split.train.end(), rng);
    for (std::size_t start = 0; start < split.train.size(); start += batch) {
      const std::size_t len = std::min(batch, split.train.size() - start);
      grad.set_zero();
      const double l =
          loss(net, std::span<const std::size_t>(split.train.data() + start, len), &grad);
      if (!std::isfinite(l) || !grad.all_finite()) {
        result.failed = true;
        result.diagnostic = "non-finite training loss at epoch " + std::to_string(epoch);
        result.epochs = epoch;
        return result;
      }
      if (cfg.clip_norm > 0.0) {
        const double norm = std::sqrt(grad.squared_norm());
        if (norm > cfg.clip_norm) grad.scale(cfg.clip_norm / norm);
      }
      adam_step(adam, net.params, grad);
    }
    result.epochs = epoch;
    const double val = evaluate(net, split.validation, batch, loss);
    result.validation_history.push_back(val);
    if (!std::isfinite(val)) {
      result.failed = true;
      result.diagnostic = "non-finite validation loss at epoch " + std::to_string(epoch);
      return result;
    }
    if (val < best) {
      best = val;
      result.net = net;
      result.validation_loss = val;
      stale = 0;
    } else if (++stale > cfg.patience) {
      break;
    }
  }
  return result;
}

}  // namespace sbi
