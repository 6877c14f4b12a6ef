#pragma once

#include <vector>

#include "msstop/design.hpp"
#include "msstop/parameters.hpp"

namespace msstop {

struct Scenario {
  ParameterSet params;
  StudyDesign design;
  /// True for the two standard sizes, N = 100 and N = 1000.
  bool standard = true;
};

/// Three periods of five occasions, two states: r = (0.4, 0.2, 0.4), s = 0.7,
/// logistic arrival with eta = (-1, 0, -2) and delta = 1, retention
/// logit phi_a(t,k) = tau(k) - (a - 1) with tau = (2.5, 1.8, 2.1, 1.4),
/// alpha = (0.35, 0.65), p = (0.6, 0.8) by state and
/// Psi = ((0.4, 0.6), (0.3, 0.7)).
Scenario paper_scenario(double N);

/// Coefficient vector of generating_structure() that expands to the scenario
/// parameters (given the observed count n for the N coordinate).
std::vector<double> paper_scenario_theta(double N, long observed);

/// Twelve periods, 253 occasions, two states with state 2 observable from
/// period 9 onwards.
StudyDesign newt_design();

}  // namespace msstop
