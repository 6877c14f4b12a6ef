#include "msstop/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "msstop/errors.hpp"
#include "msstop/rng.hpp"

namespace msstop {

Dataset make_dataset(const StudyDesign& design, const std::vector<CaptureHistory>& individuals) {
  std::map<CaptureHistory, long> merged;
  for (const auto& h : individuals) {
    if (std::any_of(h.begin(), h.end(), [](std::uint8_t x) { return x != 0; })) ++merged[h];
  }
  std::vector<CaptureHistory> histories;
  std::vector<long> counts;
  histories.reserve(merged.size());
  counts.reserve(merged.size());
  for (auto& [h, c] : merged) {
    histories.push_back(h);
    counts.push_back(c);
  }
  return Dataset(design, std::move(histories), std::move(counts));
}

Simulation simulate(const ParameterSet& params, const StudyDesign& design, std::uint64_t seed) {
  if (!(params.N >= 0.0) || std::floor(params.N) != params.N) {
    throw InputError("simulation needs an integral, non-negative N");
  }
  validate(params, design, 1e-9);
  const int T = design.periods();
  const auto individuals = static_cast<long>(params.N);

  RandomStream rng(seed);
  SimTruth truth;
  truth.params = params;
  truth.seed = seed;
  truth.abundance.assign(static_cast<std::size_t>(T), 0);
  truth.individuals.reserve(static_cast<std::size_t>(individuals));
  std::vector<CaptureHistory> histories;
  histories.reserve(static_cast<std::size_t>(individuals));

  const std::span<const double> r(params.r.data(), static_cast<std::size_t>(params.r.size()));
  for (long i = 0; i < individuals; ++i) {
    IndividualTruth ind;
    ind.arrival.assign(static_cast<std::size_t>(T), -1);
    ind.departure.assign(static_cast<std::size_t>(T), -1);
    ind.states.assign(static_cast<std::size_t>(T), {});
    CaptureHistory history(static_cast<std::size_t>(design.total_occasions()), 0);

    ind.recruited = rng.categorical(r);
    ind.last_period = ind.recruited;
    for (int age = 1; ind.last_period + 1 < T && age < design.max_primary_age(); ++age) {
      if (!rng.bernoulli(params.s(ind.last_period, age - 1))) break;
      ++ind.last_period;
    }

    for (int t = ind.recruited; t <= ind.last_period; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      ++truth.abundance[ti];
      const auto& beta = params.beta[ti];
      const auto& alpha = params.alpha[ti];
      int k = rng.categorical({beta.data(), static_cast<std::size_t>(beta.size())});
      int g = rng.categorical({alpha.data(), static_cast<std::size_t>(alpha.size())});
      ind.arrival[ti] = k;
      const int K = design.occasions(t);
      const int ages = design.max_secondary_age(t);
      for (int a = 0;; ++a, ++k) {
        ind.states[ti].push_back(g + 1);
        if (rng.bernoulli(params.p[ti][static_cast<std::size_t>(k)](g, a))) {
          history[static_cast<std::size_t>(design.offset(t) + k)] = static_cast<std::uint8_t>(g + 1);
          ind.captured = true;
        }
        if (k + 1 == K || a + 1 == ages) break;
        if (!rng.bernoulli(params.phi[ti](k, a))) break;
        const Eigen::RowVectorXd row = params.psi[ti].row(g);
        g = rng.categorical({row.data(), static_cast<std::size_t>(row.size())});
      }
      ind.departure[ti] = k;
    }
    truth.individuals.push_back(std::move(ind));
    histories.push_back(std::move(history));
  }
  return {make_dataset(design, histories), std::move(truth)};
}

}  // namespace msstop
