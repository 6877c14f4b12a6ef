#pragma once

#include <cstdint>
#include <vector>

#include "msstop/design.hpp"
#include "msstop/parameters.hpp"

namespace msstop {

/// Latent record of one simulated individual. Periods and occasions are 0-based;
/// -1 marks "did not attend".
struct IndividualTruth {
  int recruited = 0;                       ///< first attended period
  int last_period = 0;                     ///< last attended period
  std::vector<int> arrival;                ///< per period, occasion of arrival
  std::vector<int> departure;              ///< per period, last occasion present
  std::vector<std::vector<int>> states;    ///< per period, state (1-based) on each present occasion
  bool captured = false;
};

struct SimTruth {
  ParameterSet params;
  std::uint64_t seed = 0;
  std::vector<IndividualTruth> individuals;
  /// Individuals attending each period.
  std::vector<long> abundance;
};

struct Simulation {
  Dataset data;
  SimTruth truth;
};

/// Draws N individuals from the generative model.
///
/// All draws come from one RandomStream seeded with `seed`, individual by
/// individual, in this order: recruitment period; survival for each
/// following period until departure; then for each attended period the
/// arrival occasion, the initial state, and for every occasion present the
/// capture, retention (skipped at age a'(t) or on the last occasion) and, if
/// retained, the next state. Throws InputError if N is not integral.
Simulation simulate(const ParameterSet& params, const StudyDesign& design, std::uint64_t seed);

/// Merge per-individual histories into a Dataset; zero histories are dropped,
/// unique histories are sorted lexicographically.
Dataset make_dataset(const StudyDesign& design, const std::vector<CaptureHistory>& individuals);

}  // namespace msstop
