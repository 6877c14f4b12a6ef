#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "msstop/fit.hpp"
#include "msstop/structure.hpp"

namespace msstop {

/// One candidate dependency addition: replace `family`'s declaration with `spec`.
struct StructureMove {
  Family family;
  std::string spec;

  std::string label() const;
};

/// Parse `family: spec` lines (comments with `#`).
std::vector<StructureMove> parse_moves(std::string_view text);

struct SelectionStep {
  int round = 0;
  std::string move;  ///< empty for the base model
  ModelStructure structure;
  double loglik = 0.0;
  double aic = 0.0;
  int n_params = 0;
  bool converged = false;
  bool accepted = false;
};

struct SelectionResult {
  std::vector<SelectionStep> trace;
  ModelStructure best;
  FitResult best_fit;
};

/// Greedy forward AIC search. Each round fits the current model plus every
/// unused move and accepts the lowest-AIC converged candidate if it improves
/// on the current AIC. Non-converged candidates stay in the trace but are
/// never accepted.
SelectionResult step_up_selection(const Dataset& data, const std::vector<StructureMove>& moves,
                                  const ModelStructure& base, const FitOptions& options);

}  // namespace msstop
