#include "msstop/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "msstop/errors.hpp"
#include "msstop/rng.hpp"
#include "msstop/simulate.hpp"

namespace msstop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Dataset resample(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> owner;
  owner.reserve(static_cast<std::size_t>(data.observed()));
  for (std::size_t j = 0; j < data.histories().size(); ++j) {
    owner.insert(owner.end(), static_cast<std::size_t>(data.counts()[j]), j);
  }
  RandomStream rng(seed);
  std::vector<CaptureHistory> drawn;
  drawn.reserve(owner.size());
  for (std::size_t i = 0; i < owner.size(); ++i) drawn.push_back(data.histories()[owner[rng.below(owner.size())]]);
  return make_dataset(data.design(), drawn);
}

double quantile(std::vector<double> values, double probability) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * probability;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::string format_estimate(double estimate, double se) {
  if (!std::isfinite(se)) return fmt::format("{:.4g} (SE NA)", estimate);
  if (se <= 0.0) return fmt::format("{:.4g} (SE 0)", estimate);
  int decimals = std::max(0, 1 - static_cast<int>(std::floor(std::log10(se))));
  // Rounding can carry into a new leading digit (0.0996 -> 0.100).
  const double rounded = std::round(se * std::pow(10.0, decimals)) / std::pow(10.0, decimals);
  decimals = std::max(0, 1 - static_cast<int>(std::floor(std::log10(rounded))));
  return fmt::format("{:.{}f} (SE {:.{}f})", estimate, std::max(0, decimals - 1), rounded, decimals);
}

BootstrapResult bootstrap(const Dataset& data, const FitResult& full_fit, const BootstrapOptions& options) {
  if (options.replicates < 1) throw InputError("bootstrap needs at least one replicate");
  const StructureLayout layout(full_fit.structure, data.design());
  const auto full_report = layout.report(full_fit.theta_hat, data.observed());
  const auto B = static_cast<std::size_t>(options.replicates);

  BootstrapResult result;
  result.replicates = options.replicates;
  result.values.assign(B, {});
  std::vector<char> converged(B, 0);

  FitOptions fit_options = options.fit;
  fit_options.threads = 1;
  parallel_for(B, options.threads, [&](std::size_t b) {
    const Dataset replicate = resample(data, derive_seed(options.seed, b));
    const long n = replicate.observed();
    std::vector<double> start = full_fit.theta_hat;
    start[0] = std::log(std::max(1.0, full_fit.params_hat.N - static_cast<double>(n)));
    const FitResult refit = fit(replicate, full_fit.structure, fit_options, std::move(start));
    converged[b] = refit.converged ? 1 : 0;
    std::vector<double> row;
    for (const auto& v : layout.report(refit.theta_hat, n)) row.push_back(v.value);
    result.values[b] = std::move(row);
  });

  result.converged.assign(converged.begin(), converged.end());
  result.failures = static_cast<int>(std::count(converged.begin(), converged.end(), 0));
  for (std::size_t i = 0; i < full_report.size(); ++i) {
    std::vector<double> column;
    for (std::size_t b = 0; b < B; ++b) {
      if (converged[b]) column.push_back(result.values[b][i]);
    }
    BootstrapSummary summary{full_report[i].name, full_report[i].value, kNaN, kNaN, kNaN};
    if (column.size() >= 2) {
      double mean = 0.0;
      for (double v : column) mean += v;
      mean /= static_cast<double>(column.size());
      double ss = 0.0;
      for (double v : column) ss += (v - mean) * (v - mean);
      summary.se = std::sqrt(ss / static_cast<double>(column.size() - 1));
    }
    if (!column.empty()) {
      summary.lower = quantile(column, 0.025);
      summary.upper = quantile(column, 0.975);
    }
    result.summaries.push_back(std::move(summary));
  }
  return result;
}

}  // namespace msstop
