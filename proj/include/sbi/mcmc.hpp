#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sbi/types.hpp"

namespace sbi {

using LogTarget = std::function<double(const Vec&)>;

struct MhConfig {
  int chains = 8;
  int steps = 20000;    // per chain, burn-in included
  int burn_in = 10000;
  int thinning = 1;
  Vec proposal_scale;   // per-dimension proposal SD; required
  std::uint64_t seed = 0;
  // Tune the proposal during burn-in (global scale toward ~0.25 acceptance and
  // a per-chain covariance shape estimated from the first half of burn-in).
  bool adapt = true;
};

struct MhResult {
  std::vector<SampleMatrix> chains;  // post burn-in draws per chain, thinned
  double acceptance_rate = 0.0;      // post burn-in, all chains
  Vec split_rhat;                    // per dimension
  std::vector<std::string> warnings;

  SampleMatrix pooled() const;
  // n rows spread evenly over the concatenated chains.
  SampleMatrix take(int n) const;
};

class MhError : public Error {
 public:
  using Error::Error;
};

// Random-walk Metropolis with symmetric Gaussian proposals. `init` holds one
// starting point per chain, or a single row shared by all chains.
MhResult rw_metropolis(const LogTarget& log_target, const SampleMatrix& init, const MhConfig& cfg);

// Split-R-hat (Gelman et al.) per dimension over equal-length chains.
Vec split_rhat(const std::vector<SampleMatrix>& chains);

}  // namespace sbi
