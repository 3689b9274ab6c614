#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fkmc {

// Fixed-shape pairwise summation. The reduction order depends only on the
// element count, never on the worker count, so Monte Carlo results are
// bit-identical for any parallel schedule.
double pairwise_sum(std::span<const double> x);

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
};

// Two-pass sample mean and standard error of the mean.
MeanStderr mean_stderr(std::span<const double> x);

// Self-normalised (ratio-of-means) estimate mean(a)/mean(b) with the
// linearised standard error.
struct RatioResult {
  double ratio = 0.0;
  double se = 0.0;
  double ess = 0.0;  // effective sample size of the weights b
};
RatioResult ratio_mean_stderr(std::span<const double> a, std::span<const double> b);

// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

}  // namespace fkmc
