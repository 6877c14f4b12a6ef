#pragma once

#include <span>

#include <Eigen/Dense>

namespace msstop {

double inv_logit(double x) noexcept;
double logit(double p) noexcept;

/// r*(t) = r(t) / sum_{j>=t} r(j); r*(1) = r(1). A zero tail gives 0.
Eigen::VectorXd conditional_recruitment(const Eigen::VectorXd& r);

/// beta*(t,k) = beta(t,k) / sum_{j>=k} beta(t,j); same conventions as recruitment.
Eigen::VectorXd conditional_arrival(const Eigen::VectorXd& beta_t);

/// Inverse of the conditional map: x(t) = x*(t) * prod_{u<t} (1 - x*(u)).
Eigen::VectorXd stick_breaking(const Eigen::VectorXd& conditional);

/// Multinomial logit with the last category as reference. Input has length m-1, output m.
Eigen::VectorXd simplex_from_logits(std::span<const double> logits);
/// log(x_i / x_m) for i < m. Every entry of `simplex` must be positive.
Eigen::VectorXd logits_from_simplex(const Eigen::VectorXd& simplex);

/// beta(t,k) proportional to inv_logit(eta * k + delta), k = 1..K.
Eigen::VectorXd arrival_from_logistic(double eta, double delta, int occasions);
/// Normalized inverse-logit weights of an arbitrary linear predictor.
Eigen::VectorXd normalized_logistic_weights(const Eigen::VectorXd& predictor);

/// phi_a(t,k) = inv_logit(tau(k) + gamma (a-1)) at row k-1, column a-1.
/// Cells with a > k cannot be reached but are filled by the same formula.
Eigen::MatrixXd retention_from_logistic(const Eigen::VectorXd& tau, double gamma, int ages);

/// Throws ConstraintError unless entries are in [0,1] and sum to 1 within `tolerance`.
void require_simplex(const Eigen::VectorXd& x, double tolerance, const char* what);

}  // namespace msstop
