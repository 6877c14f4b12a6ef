#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msstop/fit.hpp"

namespace msstop {

struct BootstrapOptions {
  int replicates = 100;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  /// Fit settings for every replicate; starts from the full-data MLE.
  FitOptions fit;
};

struct BootstrapSummary {
  std::string name;
  double estimate = 0.0;  ///< full-data MLE
  double se = 0.0;        ///< NaN with fewer than two converged replicates
  double lower = 0.0;     ///< 2.5% percentile of converged replicates
  double upper = 0.0;     ///< 97.5% percentile
};

struct BootstrapResult {
  int replicates = 0;
  int failures = 0;
  std::vector<bool> converged;
  /// replicate x reported value, in report() order.
  std::vector<std::vector<double>> values;
  std::vector<BootstrapSummary> summaries;
};

/// Resample n individual histories with replacement.
Dataset resample(const Dataset& data, std::uint64_t seed);

/// Nonparametric bootstrap over individuals. Replicate b uses
/// derive_seed(seed, b); results are merged by replicate index so the output
/// does not depend on the thread count.
BootstrapResult bootstrap(const Dataset& data, const FitResult& full_fit, const BootstrapOptions& options);

/// Linear-interpolation quantile (R type 7) of unsorted data.
double quantile(std::vector<double> values, double probability);

/// "0.82 (SE 0.025)": SE to two significant figures, estimate to one
/// decimal fewer. The SE prints as "NA" when undefined.
std::string format_estimate(double estimate, double se);

}  // namespace msstop
