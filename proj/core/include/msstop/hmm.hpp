#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "msstop/design.hpp"
#include "msstop/parameters.hpp"

namespace msstop {

/// A probability carried as mantissa * exp(log_scale) so long products do not underflow.
struct ScaledProbability {
  double mantissa = 0.0;
  double log_scale = 0.0;

  /// -inf for a zero probability.
  double log() const noexcept;
  double value() const noexcept;
};

// Within-period (secondary) chain. State order: not-arrived, then age 1
// states 1..G, age 2 states 1..G, ..., age a' states 1..G, then departed.

/// pi(t,1) = (1 - beta(t,1), beta(t,1) alpha(t), 0, ..., 0).
Eigen::RowVectorXd build_secondary_initial(double first_arrival, const Eigen::VectorXd& alpha, int max_age);

/// Gamma(t,k). `retention(a-1)` is phi_a(t,k) for a = 1..a'-1; age a' leaves with certainty.
Eigen::MatrixXd build_secondary_transition(double conditional_arrival, const Eigen::VectorXd& alpha,
                                           const Eigen::VectorXd& retention, const Eigen::MatrixXd& psi,
                                           int max_age);

/// Diagonal of P(t,k,outcome). `capture` is the G x a' matrix p_{ga}(t,k).
Eigen::VectorXd build_observation_diagonal(int outcome, const Eigen::MatrixXd& capture, int max_age);

// Between-period (primary) chain. State order: not-recruited, ages 1..A', departed.

/// pi(1) = (1 - r(1), r(1), 0, ..., 0).
Eigen::RowVectorXd build_primary_initial(double first_recruitment, int max_age);

/// Gamma(t). `survival(A-1)` is s_A(t) for A = 1..A'-1; age A' leaves with certainty.
Eigen::MatrixXd build_primary_transition(double conditional_recruitment, const Eigen::VectorXd& survival,
                                         int max_age);

/// Likelihood machinery for one parameter set, built once and reused across
/// histories. Holds the per-period conditional arrival probabilities and the
/// all-zero period likelihoods L0(t).
class LikelihoodModel {
 public:
  /// Throws StructureError / ConstraintError if params do not fit the design.
  LikelihoodModel(const ParameterSet& params, const StudyDesign& design);

  const StudyDesign& design() const noexcept { return design_; }
  const ParameterSet& params() const noexcept { return params_; }

  /// L_j(t) by a scaled forward pass over the within-period chain.
  ScaledProbability period_likelihood(int t, std::span<const std::uint8_t> slice) const;
  /// Same value computed with the explicit dense matrices; used to cross-check.
  ScaledProbability period_likelihood_dense(int t, std::span<const std::uint8_t> slice) const;
  /// L0(t).
  const ScaledProbability& period_zero_likelihood(int t) const { return zero_[static_cast<std::size_t>(t)]; }

  /// log L_j for a full history (log L0 for the all-zero history).
  double log_history_probability(std::span<const std::uint8_t> history) const;

  /// Between-period forward pass in log space. `log_period[t]` is log L_j(t)
  /// when `captured[t]`, otherwise log L0(t).
  double combine_periods(const std::vector<double>& log_period, const std::vector<bool>& captured) const;

 private:

  StudyDesign design_;
  ParameterSet params_;
  Eigen::VectorXd recruitment_star_;
  std::vector<Eigen::VectorXd> arrival_star_;
  std::vector<ScaledProbability> zero_;
};

/// L_j(t) for the period-t slice of a history.
ScaledProbability secondary_likelihood(std::span<const std::uint8_t> slice, int t, const ParameterSet& params,
                                       const StudyDesign& design);

/// L_j for a full history; log-scaled internally, returned on the probability scale.
double primary_likelihood(std::span<const std::uint8_t> history, const ParameterSet& params,
                          const StudyDesign& design);
double log_primary_likelihood(std::span<const std::uint8_t> history, const ParameterSet& params,
                              const StudyDesign& design);

/// Full multinomial log-likelihood
///   lgamma(N+1) - lgamma(N-n+1) - sum lgamma(n_j+1) + (N-n) log L0 + sum n_j log L_j.
/// Returns -inf when an observed history is impossible. Throws DomainError when N < n.
double log_likelihood(const Dataset& data, const ParameterSet& params);

}  // namespace msstop
