#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "msstop/design.hpp"
#include "msstop/layout.hpp"
#include "msstop/optimize.hpp"
#include "msstop/parameters.hpp"
#include "msstop/structure.hpp"

namespace msstop {

struct FitOptions {
  /// Number of starts: the supplied (or default) start, then jittered copies.
  int starts = 10;
  double jitter = 0.5;
  std::uint64_t seed = 1;
  /// Worker threads for multi-start; 0 uses the hardware concurrency.
  unsigned threads = 0;
  /// |theta_i| above this flags a boundary estimate.
  double boundary_threshold = 15.0;
  MinimizerOptions minimizer;
};

struct FitResult {
  ModelStructure structure;
  std::vector<std::string> names;
  std::vector<double> theta_hat;
  ParameterSet params_hat;
  double loglik = 0.0;
  double aic = 0.0;
  int n_params = 0;
  bool converged = false;
  int starts_run = 0;
  int starts_converged = 0;
  /// Diagnostics of the start that produced theta_hat.
  MinimizerResult optimizer;
  /// Names of coefficients with |theta| above the boundary threshold.
  std::vector<std::string> boundary;
};

/// Akaike information criterion, -2 loglik + 2 k.
double aic(double loglik, int n_params) noexcept;

/// Maximum-likelihood fit. The best converged start wins; if no start
/// converges the result has converged == false and carries the best point
/// reached, never presented as an optimum.
FitResult fit(const Dataset& data, const ModelStructure& structure, const FitOptions& options = {},
              std::optional<std::vector<double>> start = std::nullopt);

/// Per-period abundance implied by the fitted N, r and s.
Eigen::VectorXd derived_abundance(const FitResult& fit);

/// Run `count` independent tasks on up to `threads` workers (0 = hardware concurrency).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace msstop
