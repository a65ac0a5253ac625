#pragma once

#include <cstdint>

#include "sbi/nn_core.hpp"
#include "sbi/types.hpp"

namespace sbi {

struct MetricTriple {
  double mmd2 = 0.0;
  double c2st = 0.5;
  double ed2 = 0.0;
};

struct LocDispReport {
  double m1 = 0.0;  // |median - theta_true| scaled by the prior range
  double m2 = 0.0;  // |mean - theta_true| scaled
  double m3 = 0.0;  // average scaled SD
  double m4 = 0.0;  // average scaled 0.15..0.85 inter-quantile range
};

// Median of the nonzero pairwise Euclidean distances.
double median_heuristic(const SampleMatrix& pooled);

// Squared MMD, V-statistic, Gaussian kernel with the median-heuristic bandwidth of A u B.
double mmd2(const SampleMatrix& a, const SampleMatrix& b);

// Squared energy distance, V-statistic.
double ed2(const SampleMatrix& a, const SampleMatrix& b);

struct C2stConfig {
  int folds = 5;
  int width_per_dim = 10;  // hidden width = width_per_dim * d, two hidden layers
  TrainConfig train{.batch_size = 100, .max_epochs = 1000, .validation_fraction = 0.1,
                    .patience = 20, .seed = 0, .step_size = 2e-3, .clip_norm = 0.0};
};

// Stratified k-fold cross-validated accuracy of an MLP separating A (label 0)
// from B (label 1) after standardizing the pooled data.
double c2st(const SampleMatrix& a, const SampleMatrix& b, std::uint64_t seed,
            const C2stConfig& cfg = {});

MetricTriple metric_triple(const SampleMatrix& a, const SampleMatrix& b, std::uint64_t seed);

// Linear interpolation between order statistics (q in [0, 1]).
double quantile(Vec values, double q);

LocDispReport loc_disp(const SampleMatrix& sample, const Vec& theta_true, const Vec& prior_ranges);

}  // namespace sbi
