#pragma once

#include <vector>

#include <Eigen/Dense>

#include "msstop/design.hpp"

namespace msstop {

/// Natural-scale parameters of the multi-state multi-period stopover model.
///
/// Storage uses 0-based indices; the comments give the 1-based model symbol.
struct ParameterSet {
  double N = 0.0;                      ///< super-population size
  Eigen::VectorXd r;                   ///< r(t), length T
  Eigen::MatrixXd s;                   ///< s_A(t): row t (T-1 rows), column A-1 (A' columns)
  std::vector<Eigen::VectorXd> beta;   ///< beta(t,k), one length-K(t) simplex per period
  std::vector<Eigen::MatrixXd> phi;    ///< phi_a(t,k): per period, (K(t)-1) x a'(t)
  std::vector<Eigen::VectorXd> alpha;  ///< alpha_g(t), one length-G simplex per period
  std::vector<Eigen::MatrixXd> psi;    ///< Psi(t), one G x G row-stochastic matrix per period
  /// p_{ga}(t,k): per period, per occasion, a G x a'(t) matrix.
  std::vector<std::vector<Eigen::MatrixXd>> p;
};

/// Default tolerance for simplex and row sums when validating external input.
inline constexpr double kSimplexTolerance = 1e-10;

/// Throws StructureError on shape mismatch, ConstraintError on a constraint violation.
void validate(const ParameterSet& params, const StudyDesign& design, double tolerance = kSimplexTolerance);

/// Zero-filled parameter set with the shapes `design` requires.
ParameterSet zero_parameters(const StudyDesign& design);

/// Per-period abundance N(t): expected number of the N individuals attending
/// period t, N * sum_{b<=t} r(b) * prod_{u=b}^{t-1} s_{u-b+1}(u).
/// Individuals reaching age A' leave with certainty.
Eigen::VectorXd derived_abundance(const ParameterSet& params, const StudyDesign& design);

}  // namespace msstop
