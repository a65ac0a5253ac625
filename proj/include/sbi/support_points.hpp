#pragma once

#include <cstdint>
#include <vector>

#include "sbi/types.hpp"

namespace sbi {

struct SpConfig {
  int n = 1;                // number of support points
  int max_iterations = 200;
  // Stop when no point moves farther than this (data units). Values <= 0 select
  // 1e-6 times the largest per-dimension range of the reference sample.
  double tolerance = 0.0;
  double eps = 1e-10;       // distance guard
  std::uint64_t seed = 0;   // initial subsample
  bool record_objective = false;
};

struct SpResult {
  SampleMatrix points;
  int iterations = 0;
  bool converged = false;
  double max_movement = 0.0;         // of the last sweep
  std::vector<double> objective;     // per iterate, when recorded (entry 0 = initial)
};

// (2/(nN)) sum_i sum_m |y_m - x_i| - (1/n^2) sum_i sum_j |x_i - x_j|
double sp_objective(const SampleMatrix& x, const SampleMatrix& y);

// One Jacobi sweep of the convex-concave update; every point is updated from
// the previous iterate. Reference points within eps of x_i are excluded from
// its weights and handled by a damped (Vardi-Zhang) step instead.
SampleMatrix ccp_step(const SampleMatrix& x, const SampleMatrix& y, double eps = 1e-10);

// n points of `y` chosen uniformly without replacement.
SampleMatrix random_subsample(const SampleMatrix& y, int n, std::uint64_t seed);

// Support points of `y`, started from a seeded random subsample. Hitting the
// iteration cap returns the current points with converged = false.
SpResult support_points(const SampleMatrix& y, const SpConfig& cfg);

}  // namespace sbi
