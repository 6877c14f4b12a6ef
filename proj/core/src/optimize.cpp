#include "msstop/optimize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace msstop {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 40;

double max_abs(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

class Counted {
 public:
  explicit Counted(const Objective& f) : f_(f) {}
  double operator()(const VectorXd& x) {
    ++evaluations;
    const double v = f_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }
  VectorXd gradient(const VectorXd& x, double step) {
    int used = 0;
    const auto g = numeric_gradient(f_, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), step,
                                    &used);
    evaluations += used;
    return Eigen::Map<const VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
  }
  int evaluations = 0;

 private:
  const Objective& f_;
};

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::vector<double> numeric_gradient(const Objective& f, std::span<const double> x, double step, int* evaluations) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> g(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    point[i] = x[i] + h;
    const double up = f(point);
    point[i] = x[i] - h;
    const double down = f(point);
    point[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  if (evaluations) *evaluations += static_cast<int>(2 * x.size());
  return g;
}

MinimizerResult minimize_bfgs(const Objective& f, std::vector<double> x0, const MinimizerOptions& options) {
  Counted objective(f);
  const auto n = static_cast<Eigen::Index>(x0.size());
  VectorXd x = Eigen::Map<const VectorXd>(x0.data(), n);
  MinimizerResult result;
  result.method = "bfgs";

  double fx = objective(x);
  if (!std::isfinite(fx)) {
    result.x = std::move(x0);
    result.value = fx;
    result.evaluations = objective.evaluations;
    result.gradient_norm = std::numeric_limits<double>::infinity();
    result.message = "objective is not finite at the start";
    return result;
  }
  VectorXd g = objective.gradient(x, options.difference_step);
  MatrixXd H = MatrixXd::Identity(n, n);
  bool fresh = true;

  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    if (!g.allFinite()) {
      result.message = "gradient is not finite";
      break;
    }
    if (max_abs(g) < options.gradient_tolerance) {
      result.converged = true;
      result.message = "gradient below tolerance";
      break;
    }
    VectorXd d = -H * g;
    if (d.dot(g) >= 0.0) {
      H.setIdentity();
      fresh = true;
      d = -g;
    }
    const double length = d.norm();
    if (length > options.max_step) d *= options.max_step / length;

    const double slope = d.dot(g);
    double t = 1.0;
    double fn = 0.0;
    VectorXd xn;
    bool accepted = false;
    for (int halving = 0; halving < kMaxHalvings; ++halving, t *= 0.5) {
      xn = x + t * d;
      fn = objective(xn);
      if (fn <= fx + kArmijo * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!fresh) {
        H.setIdentity();
        fresh = true;
        continue;
      }
      result.message = "line search failed";
      break;
    }

    VectorXd gn = objective.gradient(xn, options.difference_step);
    const VectorXd s = xn - x;
    const VectorXd y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (fresh) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const MatrixXd left = MatrixXd::Identity(n, n) - rho * s * y.transpose();
      H = left * H * left.transpose() + rho * s * s.transpose();
      fresh = false;
    }
    x = std::move(xn);
    fx = fn;
    g = std::move(gn);
  }
  if (iteration == options.max_iterations) result.message = "iteration limit reached";

  result.x = to_std(x);
  result.value = fx;
  result.iterations = iteration;
  result.evaluations = objective.evaluations;
  result.gradient_norm = g.allFinite() ? max_abs(g) : std::numeric_limits<double>::infinity();
  return result;
}

MinimizerResult minimize_simplex(const Objective& f, std::vector<double> x0, const MinimizerOptions& options) {
  Counted objective(f);
  const auto n = static_cast<Eigen::Index>(x0.size());
  MinimizerResult result;
  result.method = "simplex";

  std::vector<VectorXd> points(static_cast<std::size_t>(n + 1), Eigen::Map<const VectorXd>(x0.data(), n));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& p = points[static_cast<std::size_t>(i + 1)];
    p[i] += std::max(0.5, 0.1 * std::abs(p[i]));
  }
  std::vector<double> values(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) values[i] = objective(points[i]);
  std::vector<std::size_t> order(points.size());

  int iteration = 0;
  while (objective.evaluations < options.simplex_max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    double spread = 0.0;
    for (const auto& p : points) spread = std::max(spread, max_abs(p - points[best]));
    if (std::isfinite(values[worst]) &&
        values[worst] - values[best] <= options.simplex_tolerance * (std::abs(values[best]) + options.simplex_tolerance) &&
        spread <= 1e-6) {
      result.converged = true;
      result.message = "simplex collapsed";
      break;
    }
    ++iteration;

    VectorXd centroid = VectorXd::Zero(n);
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i != worst) centroid += points[i];
    }
    centroid /= static_cast<double>(n);

    const VectorXd reflected = centroid + (centroid - points[worst]);
    const double fr = objective(reflected);
    if (fr < values[best]) {
      const VectorXd expanded = centroid + 2.0 * (centroid - points[worst]);
      const double fe = objective(expanded);
      if (fe < fr) {
        points[worst] = expanded;
        values[worst] = fe;
      } else {
        points[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      points[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const VectorXd contracted =
        outside ? VectorXd(centroid + 0.5 * (reflected - centroid)) : VectorXd(centroid + 0.5 * (points[worst] - centroid));
    const double fc = objective(contracted);
    if (fc < std::min(fr, values[worst])) {
      points[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i == best) continue;
      points[i] = points[best] + 0.5 * (points[i] - points[best]);
      values[i] = objective(points[i]);
    }
  }
  if (!result.converged) result.message = "evaluation limit reached";

  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  result.x = to_std(points[best]);
  result.value = values[best];
  result.iterations = iteration;
  result.evaluations = objective.evaluations;
  return result;
}

MinimizerResult minimize(const Objective& f, std::vector<double> x0, const MinimizerOptions& options) {
  MinimizerResult first = minimize_bfgs(f, std::move(x0), options);
  if (first.converged || !std::isfinite(first.value)) return first;

  const MinimizerResult polish = minimize_simplex(f, first.x, options);
  MinimizerResult second = minimize_bfgs(f, polish.x, options);
  second.evaluations += first.evaluations + polish.evaluations;
  second.iterations += first.iterations;
  second.method = "bfgs+simplex";
  if (!second.converged && first.value < second.value) {
    first.evaluations = second.evaluations;
    first.method = second.method;
    return first;
  }
  return second;
}

}  // namespace msstop
