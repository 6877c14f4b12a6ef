#pragma once

#include <cstdint>
#include <vector>

#include "msstop/design.hpp"
#include "msstop/parameters.hpp"
#include "msstop/rng.hpp"

namespace msstop::cli {

/// Valid parameters with free probabilities in [0.05, 0.95] and simplex
/// weights bounded away from zero on available states.
ParameterSet random_parameters(const StudyDesign& design, RandomStream& rng, double N);

/// Every history the design admits, including the all-zero one.
std::vector<CaptureHistory> enumerate_histories(const StudyDesign& design);

struct OracleReport {
  int instances = 0;
  long histories = 0;
  double max_abs_deviation = 0.0;
  double max_rel_deviation = 0.0;
};

/// Compare the HMM likelihood against the brute-force path sum for every
/// admissible history of `instances` random parameter sets.
OracleReport oracle_check(const StudyDesign& design, int instances, std::uint64_t seed);

}  // namespace msstop::cli
