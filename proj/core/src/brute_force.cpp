#include "msstop/brute_force.hpp"

#include <algorithm>
#include <cmath>

#include "msstop/errors.hpp"

namespace msstop {

namespace {

double period_path_count(const StudyDesign& design, int t) {
  const int K = design.occasions(t);
  const int ages = design.max_secondary_age(t);
  const double G = design.states();
  double total = 0.0;
  for (int arrival = 0; arrival < K; ++arrival) {
    for (int length = 1; length <= std::min(K - arrival, ages); ++length) total += std::pow(G, length);
  }
  return total;
}

double outcome_probability(std::uint8_t outcome, int state, double capture) {
  if (outcome == 0) return 1.0 - capture;
  return outcome == state + 1 ? capture : 0.0;
}

/// Walks every within-period path after arrival: occasion k, age a (0-based), state g.
double walk(const ParameterSet& params, const StudyDesign& design, int t, std::span<const std::uint8_t> slice, int k,
            int a, int g) {
  const auto ti = static_cast<std::size_t>(t);
  const int K = design.occasions(t);
  const double here =
      outcome_probability(slice[static_cast<std::size_t>(k)], g, params.p[ti][static_cast<std::size_t>(k)](g, a));
  if (k + 1 == K) return here;

  const bool quiet_after = std::all_of(slice.begin() + k + 1, slice.end(), [](std::uint8_t x) { return x == 0; });
  const double leave = a + 1 == design.max_secondary_age(t) ? 1.0 : 1.0 - params.phi[ti](k, a);
  double total = leave * (quiet_after ? 1.0 : 0.0);
  if (a + 1 < design.max_secondary_age(t)) {
    const double stay = params.phi[ti](k, a);
    for (int h = 0; h < design.states(); ++h) {
      total += stay * params.psi[ti](g, h) * walk(params, design, t, slice, k + 1, a + 1, h);
    }
  }
  return here * total;
}

/// Probability of a period's outcomes given the individual attends the period.
double attended_period(const ParameterSet& params, const StudyDesign& design, int t, std::span<const std::uint8_t> slice) {
  const auto ti = static_cast<std::size_t>(t);
  double total = 0.0;
  for (int arrival = 0; arrival < design.occasions(t); ++arrival) {
    // Not yet present before arrival: only zeros are possible.
    if (!std::all_of(slice.begin(), slice.begin() + arrival, [](std::uint8_t x) { return x == 0; })) continue;
    for (int g = 0; g < design.states(); ++g) {
      total += params.beta[ti][arrival] * params.alpha[ti][g] * walk(params, design, t, slice, arrival, 0, g);
    }
  }
  return total;
}

}  // namespace

double hidden_path_count(const StudyDesign& design) {
  const int T = design.periods();
  double total = 0.0;
  for (int b = 0; b < T; ++b) {
    for (int e = b; e < std::min(T, b + design.max_primary_age()); ++e) {
      double paths = 1.0;
      for (int t = b; t <= e; ++t) paths *= period_path_count(design, t);
      total += paths;
    }
  }
  return total;
}

double brute_force_likelihood(std::span<const std::uint8_t> history, const ParameterSet& params,
                              const StudyDesign& design) {
  if (static_cast<int>(history.size()) != design.total_occasions()) {
    throw StructureError("history length does not match the design");
  }
  if (hidden_path_count(design) > kMaxBruteForcePaths) {
    throw DomainError("hidden path space exceeds the brute-force limit");
  }
  validate(params, design, 1e-9);
  const int T = design.periods();
  std::vector<double> attended(static_cast<std::size_t>(T));
  std::vector<bool> quiet(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const auto s = period_slice(design, history, t);
    attended[static_cast<std::size_t>(t)] = attended_period(params, design, t, s);
    quiet[static_cast<std::size_t>(t)] = std::all_of(s.begin(), s.end(), [](std::uint8_t x) { return x == 0; });
  }

  double total = 0.0;
  for (int b = 0; b < T; ++b) {
    // Periods before recruitment must be empty.
    bool ok = true;
    for (int t = 0; t < b; ++t) ok = ok && quiet[static_cast<std::size_t>(t)];
    if (!ok) continue;
    double alive = params.r[b];
    for (int e = b; e < T; ++e) {
      alive *= attended[static_cast<std::size_t>(e)];
      const int age = e - b + 1;
      const bool can_survive = e + 1 < T && age < design.max_primary_age();
      const double leaves = e + 1 == T ? 1.0 : (can_survive ? 1.0 - params.s(e, age - 1) : 1.0);
      bool tail_quiet = true;
      for (int t = e + 1; t < T; ++t) tail_quiet = tail_quiet && quiet[static_cast<std::size_t>(t)];
      if (tail_quiet) total += alive * leaves;
      if (!can_survive) break;
      alive *= params.s(e, age - 1);
    }
  }
  return total;
}

}  // namespace msstop
