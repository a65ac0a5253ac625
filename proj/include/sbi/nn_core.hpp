#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sbi/types.hpp"

namespace sbi {

enum class Activation { ReLU, Tanh };

// Weights and biases of a feed-forward net. Also used for gradients and Adam moments.
struct Parameters {
  std::vector<Mat> weights;  // weights[l] is dims[l+1] x dims[l]
  std::vector<Vec> biases;

  Parameters zeros_like() const;
  void set_zero();
  void add_scaled(const Parameters& other, double scale);
  void scale(double factor);
  double squared_norm() const;
  bool all_finite() const;
  std::size_t size() const;
};

// Fully connected net: hidden layers use `hidden`, the output layer is linear.
struct Mlp {
  std::vector<int> dims;
  Parameters params;
  Activation hidden = Activation::ReLU;

  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }
  std::size_t num_layers() const { return params.weights.size(); }
};

// Glorot-uniform weights, zero biases.
Mlp make_mlp(std::vector<int> dims, Activation hidden, std::uint64_t seed);
// All weights and biases zero.
Mlp make_zero_mlp(std::vector<int> dims, Activation hidden);

// Post-activation values of every layer; activations[0] is the input batch.
struct ForwardCache {
  std::vector<Mat> activations;
  const Mat& output() const { return activations.back(); }
};

Vec forward(const Mlp& net, const Vec& input);
// Rows of `inputs` are items.
Mat forward_batch(const Mlp& net, const Mat& inputs);
ForwardCache forward_cached(const Mlp& net, const Mat& inputs);

// Gradient of <upstream, forward(net, input)> with respect to the parameters.
Parameters backward(const Mlp& net, const Vec& input, const Vec& upstream);
// Accumulates (adds) the gradient summed over the rows of `upstream` into `grad`.
void backward_batch(const Mlp& net, const ForwardCache& cache, const Mat& upstream,
                    Parameters& grad);

struct AdamState {
  Parameters first_moment;
  Parameters second_moment;
  long step = 0;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(const Parameters& shape, double step_size = 1e-3);
};

void adam_step(AdamState& state, Parameters& params, const Parameters& grads);

struct TrainConfig {
  int batch_size = 50;
  int max_epochs = 500;
  double validation_fraction = 0.1;
  int patience = 20;
  std::uint64_t seed = 0;
  double step_size = 1e-3;
  double clip_norm = 5.0;  // <= 0 disables gradient-norm clipping
};

// Mean loss over the items in `batch`. When `grad` is non-null it receives the
// gradient of that mean loss (overwritten, same shapes as the net).
using BatchLoss =
    std::function<double(const Mlp& net, std::span<const std::size_t> batch, Parameters* grad)>;

struct TrainResult {
  Mlp net;                       // parameters with the best validation loss seen
  double validation_loss = 0.0;  // validation loss of `net`
  int epochs = 0;
  bool failed = false;
  std::string diagnostic;
  std::vector<double> validation_history;  // entry 0 is the initial network
};

// Mini-batch Adam with early stopping on a held-out split (the last
// validation_fraction of a seeded shuffle of [0, n_items)).
TrainResult train(const Mlp& init, std::size_t n_items, const BatchLoss& loss,
                  const TrainConfig& cfg);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};
Split train_validation_split(std::size_t n_items, double validation_fraction, std::uint64_t seed);

}  // namespace sbi
