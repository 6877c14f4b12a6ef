#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace msstop {

using Objective = std::function<double(std::span<const double>)>;

struct MinimizerOptions {
  int max_iterations = 500;
  /// Converged when every central-difference partial derivative is below this.
  double gradient_tolerance = 1e-4;
  double difference_step = 1e-5;
  /// Largest Euclidean step a single quasi-Newton iteration may take.
  double max_step = 5.0;
  int simplex_max_evaluations = 20000;
  double simplex_tolerance = 1e-9;
};

struct MinimizerResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;  ///< max-abs central-difference gradient at x
  std::string method;          ///< "bfgs" or "bfgs+simplex"
  std::string message;
};

/// Central-difference gradient.
std::vector<double> numeric_gradient(const Objective& f, std::span<const double> x, double step,
                                     int* evaluations = nullptr);

/// BFGS with finite-difference gradients and a backtracking line search that
/// treats non-finite values as failed trial points.
MinimizerResult minimize_bfgs(const Objective& f, std::vector<double> x0, const MinimizerOptions& options);

/// Nelder-Mead simplex search.
MinimizerResult minimize_simplex(const Objective& f, std::vector<double> x0, const MinimizerOptions& options);

/// BFGS; if it stalls without meeting the gradient test, a simplex search
/// from the stall point followed by a second BFGS pass.
MinimizerResult minimize(const Objective& f, std::vector<double> x0, const MinimizerOptions& options);

}  // namespace msstop
