#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sbi/density.hpp"
#include "sbi/mcmc.hpp"
#include "sbi/nn_core.hpp"
#include "sbi/tasks.hpp"
#include "sbi/types.hpp"

namespace sbi {

enum class Method { Regular, Surrogate, SupportPoints, Combined, Snle, SnleSurrogate };

std::string method_name(Method m);
// Throws UnknownNameError listing the valid names.
Method parse_method(const std::string& name);
std::vector<std::string> method_names();

// Round kinds for a custom surrogate schedule: a Simulator round spends real
// simulator calls (and refits the surrogate), a Surrogate round draws
// multiplier x (round budget) pairs from the surrogate instead.
enum class RoundKind { Simulator, Surrogate };

struct InferenceConfig {
  std::string task;
  int budget = 1000;  // total simulator calls
  int rounds = 2;
  Method method = Method::Regular;
  int surrogate_multiplier = 10;
  int sp_oversample = 2;  // draw sp_oversample * n, keep n support points
  int atoms = 10;
  MdnConfig mdn;
  TrainConfig train;
  int n_post = 5000;
  std::uint64_t seed = 0;
  // Optional alternating schedule for the surrogate method; empty selects the
  // default (one simulator round with the whole budget, one surrogate round).
  std::vector<RoundKind> schedule;
  // MCMC settings for the SNLE methods (proposal_scale empty = 0.1 x prior range).
  MhConfig mh{.chains = 4, .steps = 3000, .burn_in = 1500, .thinning = 1, .proposal_scale = {},
              .seed = 0, .adapt = true};
};

struct PosteriorResult {
  SampleMatrix samples;             // n_post x d_theta, inside the prior support
  std::optional<Mdn> posterior;     // absent for SNLE
  std::optional<Mdn> surrogate;     // likelihood model p(x | theta), when one was trained
  long simulator_calls = 0;
  long training_pairs = 0;
  double wall_seconds = 0.0;
  bool training_failed = false;
  bool surrogate_fallback = false;  // surrogate training failed; its round was skipped
  bool sp_converged = true;
  long leakage_rejections = 0;
  std::vector<std::string> diagnostics;
};

// Wraps a task simulator and counts every call.
class CountingSimulator {
 public:
  explicit CountingSimulator(const Task& task) : task_(task) {}
  // One simulation per row of `thetas`, row i seeded with derive_seed(seed, i).
  SampleMatrix simulate(const SampleMatrix& thetas, std::uint64_t seed);
  long calls() const { return calls_; }

 private:
  const Task& task_;
  long calls_ = 0;
};

// Per-round simulator budgets: equal shares with the remainder in the last round.
std::vector<int> split_budget(int budget, int rounds);

PosteriorResult run_regular(const InferenceConfig& cfg);
PosteriorResult run_surrogate(const InferenceConfig& cfg);
PosteriorResult run_sp(const InferenceConfig& cfg);
PosteriorResult run_combined(const InferenceConfig& cfg);
PosteriorResult run_snle(const InferenceConfig& cfg);
PosteriorResult run_snle_surrogate(const InferenceConfig& cfg);
// Dispatches on cfg.method.
PosteriorResult run_inference(const InferenceConfig& cfg);

}  // namespace sbi
