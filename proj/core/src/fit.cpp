#include "msstop/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "msstop/errors.hpp"
#include "msstop/hmm.hpp"
#include "msstop/rng.hpp"

namespace msstop {

double aic(double loglik, int n_params) noexcept { return -2.0 * loglik + 2.0 * n_params; }

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(threads, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          task(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

FitResult fit(const Dataset& data, const ModelStructure& structure, const FitOptions& options,
              std::optional<std::vector<double>> start) {
  const StructureLayout layout(structure, data.design());
  const long observed = data.observed();
  const Objective objective = [&](std::span<const double> theta) {
    try {
      const double ll = log_likelihood(data, layout.expand(theta, observed));
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<double> origin = start ? std::move(*start) : layout.default_start(observed);
  if (origin.size() != layout.dimension()) throw StructureError("start vector has the wrong length");

  const auto starts = static_cast<std::size_t>(std::max(1, options.starts));
  std::vector<MinimizerResult> runs(starts);
  parallel_for(starts, options.threads, [&](std::size_t i) {
    std::vector<double> x0 = origin;
    if (i > 0) {
      RandomStream rng(derive_seed(options.seed, i));
      for (double& v : x0) v += options.jitter * rng.normal();
    }
    runs[i] = minimize(objective, std::move(x0), options.minimizer);
  });

  FitResult result;
  result.structure = structure;
  result.names = layout.names();
  result.n_params = static_cast<int>(layout.dimension());
  result.starts_run = static_cast<int>(starts);
  const MinimizerResult* best = nullptr;
  for (const auto& run : runs) {
    if (run.converged) ++result.starts_converged;
  }
  // Converged starts outrank non-converged ones; ties go to the earlier start.
  for (const auto& run : runs) {
    if (!best || (run.converged && !best->converged) ||
        (run.converged == best->converged && run.value < best->value)) {
      best = &run;
    }
  }
  result.optimizer = *best;
  result.converged = best->converged;
  result.theta_hat = best->x;
  result.params_hat = layout.expand(result.theta_hat, observed);
  result.loglik = -best->value;
  result.aic = aic(result.loglik, result.n_params);
  for (std::size_t i = 0; i < result.theta_hat.size(); ++i) {
    if (std::abs(result.theta_hat[i]) > options.boundary_threshold) result.boundary.push_back(result.names[i]);
  }
  return result;
}

Eigen::VectorXd derived_abundance(const FitResult& fit) {
  const auto& p = fit.params_hat;
  const auto T = static_cast<int>(p.r.size());
  const auto max_age = static_cast<int>(p.s.cols());
  Eigen::VectorXd out(T);
  for (int t = 0; t < T; ++t) {
    double total = 0.0;
    for (int b = 0; b <= t; ++b) {
      double alive = p.r[b];
      for (int u = b; u < t && alive > 0.0; ++u) {
        const int age = u - b + 1;
        alive *= age < max_age ? p.s(u, age - 1) : 0.0;
      }
      total += alive;
    }
    out[t] = p.N * total;
  }
  return out;
}

}  // namespace msstop
