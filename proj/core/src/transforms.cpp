#include "msstop/transforms.hpp"

#include <cmath>
#include <string>

#include "msstop/errors.hpp"

namespace msstop {

double inv_logit(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

void require_simplex(const Eigen::VectorXd& x, double tolerance, const char* what) {
  if (x.size() == 0) throw ConstraintError(std::string(what) + " is empty");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) {
      throw ConstraintError(std::string(what) + " has an entry outside [0,1]");
    }
  }
  if (std::abs(x.sum() - 1.0) > tolerance) throw ConstraintError(std::string(what) + " does not sum to 1");
}

namespace {

Eigen::VectorXd conditional(const Eigen::VectorXd& x, const char* what) {
  require_simplex(x, 1e-9, what);
  const auto m = x.size();
  Eigen::VectorXd out(m);
  double tail = 0.0;
  // Tail sums accumulated from the end so the last entry is exact.
  Eigen::VectorXd tails(m);
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    tail += x[i];
    tails[i] = tail;
  }
  out[0] = x[0];
  for (Eigen::Index i = 1; i < m; ++i) {
    out[i] = tails[i] > 0.0 ? std::min(1.0, x[i] / tails[i]) : 0.0;
  }
  return out;
}

}  // namespace

Eigen::VectorXd conditional_recruitment(const Eigen::VectorXd& r) { return conditional(r, "recruitment"); }

Eigen::VectorXd conditional_arrival(const Eigen::VectorXd& beta_t) { return conditional(beta_t, "arrival"); }

Eigen::VectorXd stick_breaking(const Eigen::VectorXd& conditional) {
  Eigen::VectorXd out(conditional.size());
  double remaining = 1.0;
  for (Eigen::Index i = 0; i < conditional.size(); ++i) {
    out[i] = conditional[i] * remaining;
    remaining *= 1.0 - conditional[i];
  }
  return out;
}

Eigen::VectorXd simplex_from_logits(std::span<const double> logits) {
  const auto m = static_cast<Eigen::Index>(logits.size()) + 1;
  double top = 0.0;
  for (double v : logits) top = std::max(top, v);
  Eigen::VectorXd out(m);
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    out[i] = std::exp(logits[static_cast<std::size_t>(i)] - top);
    total += out[i];
  }
  out[m - 1] = std::exp(-top);
  total += out[m - 1];
  return out / total;
}

Eigen::VectorXd logits_from_simplex(const Eigen::VectorXd& simplex) {
  const auto m = simplex.size();
  if (m == 0 || !(simplex.minCoeff() > 0.0)) {
    throw ConstraintError("multinomial logits need strictly positive probabilities");
  }
  Eigen::VectorXd out(m - 1);
  for (Eigen::Index i = 0; i + 1 < m; ++i) out[i] = std::log(simplex[i]) - std::log(simplex[m - 1]);
  return out;
}

Eigen::VectorXd normalized_logistic_weights(const Eigen::VectorXd& predictor) {
  // Work with log weights: log inv_logit(x) = -log1p(exp(-x)).
  const auto m = predictor.size();
  Eigen::VectorXd logw(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = predictor[i];
    logw[i] = x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
  }
  const double top = logw.maxCoeff();
  Eigen::VectorXd w = (logw.array() - top).exp().matrix();
  return w / w.sum();
}

Eigen::VectorXd arrival_from_logistic(double eta, double delta, int occasions) {
  if (occasions < 1) throw StructureError("arrival needs at least one occasion");
  Eigen::VectorXd predictor(occasions);
  for (int k = 1; k <= occasions; ++k) predictor[k - 1] = eta * k + delta;
  return normalized_logistic_weights(predictor);
}

Eigen::MatrixXd retention_from_logistic(const Eigen::VectorXd& tau, double gamma, int ages) {
  Eigen::MatrixXd phi(tau.size(), ages);
  for (Eigen::Index k = 0; k < tau.size(); ++k) {
    for (int a = 1; a <= ages; ++a) phi(k, a - 1) = inv_logit(tau[k] + gamma * (a - 1));
  }
  return phi;
}

}  // namespace msstop
