#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "msstop/design.hpp"
#include "msstop/parameters.hpp"
#include "msstop/structure.hpp"

namespace msstop {

struct ReportedValue {
  std::string name;
  double value = 0.0;
};

/// A ModelStructure compiled against a StudyDesign: the map between the
/// unconstrained optimizer vector theta and a ParameterSet.
///
/// theta[0] is log(N - n); the remaining entries follow the family order
/// r, s, beta, phi, alpha, psi, p. Probabilities use the inverse logit of a
/// linear predictor, simplexes the multinomial logit with the last category
/// as reference.
class StructureLayout {
 public:
  StructureLayout(ModelStructure structure, StudyDesign design);
  ~StructureLayout();
  StructureLayout(const StructureLayout&);
  StructureLayout& operator=(const StructureLayout&);
  StructureLayout(StructureLayout&&) noexcept;
  StructureLayout& operator=(StructureLayout&&) noexcept;

  std::size_t dimension() const noexcept;
  const std::vector<std::string>& names() const noexcept;
  const ModelStructure& structure() const noexcept;
  const StudyDesign& design() const noexcept;

  /// Throws StructureError when theta has the wrong length.
  ParameterSet expand(std::span<const double> theta, long observed) const;

  /// Preimage of `params` under expand. Exact for parameter sets in the image
  /// of the structure; otherwise the least-squares fit on the link scale.
  /// Throws ConstraintError for boundary values (0/1 probabilities, N <= n).
  std::vector<double> to_unconstrained(const ParameterSet& params, long observed) const;

  /// Natural-scale summary: N, derived N(t), then every distinct estimable
  /// value of each family. Names are stable for a fixed structure and design.
  std::vector<ReportedValue> report(std::span<const double> theta, long observed) const;

  /// Starting vector: N = n + max(1, n/5), every other coefficient zero.
  std::vector<double> default_start(long observed) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ParameterSet expand_structure(const ModelStructure& structure, std::span<const double> theta,
                              const StudyDesign& design, long observed);

}  // namespace msstop
