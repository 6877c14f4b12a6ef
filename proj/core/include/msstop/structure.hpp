#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace msstop {

/// Index a term coefficient varies over.
enum class Factor { year, occasion, age, state };

/// Covariate a term coefficient multiplies. `none` makes the term a plain factor effect.
enum class Covariate { none, year, occasion, age };

/// One additive term of a logit-scale linear predictor.
///
/// The coefficient is indexed by the product of `factors` and multiplies the
/// covariate value (`occasion` -> k, `age` -> a-1, `year` -> t). An empty term
/// with no covariate is the shared intercept ("const").
struct Term {
  std::vector<Factor> factors;
  Covariate covariate = Covariate::none;

  friend bool operator==(const Term&, const Term&) = default;
};

struct LinearPredictor {
  std::vector<Term> terms;

  friend bool operator==(const LinearPredictor&, const LinearPredictor&) = default;
};

/// How a simplex family (recruitment, initial state, state transition) varies.
enum class SimplexForm {
  uniform,  ///< fixed equal probabilities, no parameters
  shared,   ///< one simplex shared by all periods ("const")
  by_year,  ///< a separate simplex per period ("year")
};

enum class ArrivalForm {
  uniform,   ///< beta(t,k) = 1/K(t)
  by_year,   ///< free simplex per period
  logistic,  ///< normalized inverse-logit weights of `arrival_predictor`
};

/// Declares which dependencies each parameter family carries.
///
/// Text form, one family per line (`#` starts a comment):
///
///     r:     uniform | year
///     s:     <terms>
///     beta:  uniform | year | logistic(<terms>)
///     phi:   <terms>
///     alpha: uniform | const | year
///     psi:   uniform | const | year
///     p:     <terms>
///
/// where <terms> is `term + term + ...` and a term is `const` or a `:`-joined
/// list drawn from {year, occasion, age, state} with at most one linear
/// covariate {year.linear, occasion.linear, age.linear}. For example the
/// arrival regression with a shared intercept and year-specific gradient is
/// `logistic(const + year:occasion.linear)`. Families left out keep the
/// default-constructed declaration, which is the all-constant model.
struct ModelStructure {
  SimplexForm recruitment = SimplexForm::uniform;
  LinearPredictor survival{{Term{}}};
  ArrivalForm arrival = ArrivalForm::uniform;
  LinearPredictor arrival_predictor;
  LinearPredictor retention{{Term{}}};
  SimplexForm initial_state = SimplexForm::shared;
  SimplexForm transition = SimplexForm::shared;
  LinearPredictor capture{{Term{}}};

  friend bool operator==(const ModelStructure&, const ModelStructure&) = default;
};

/// Parameter families addressable in structure text.
enum class Family { recruitment, survival, arrival, retention, initial_state, transition, capture };

std::string_view family_key(Family family) noexcept;
std::optional<Family> family_from_key(std::string_view key) noexcept;

/// Throws ParseError (with the 1-based line) on malformed text.
ModelStructure parse_structure(std::string_view text);
/// Canonical text form; parse_structure(to_string(s)) == s.
std::string to_string(const ModelStructure& structure);

std::string to_string(const LinearPredictor& predictor);
LinearPredictor parse_predictor(std::string_view text);

/// Replace one family's declaration using the right-hand side of a
/// `family: spec` line. Used for step-up moves.
ModelStructure with_family(const ModelStructure& structure, Family family, std::string_view spec);
/// Right-hand side text of one family's declaration.
std::string family_spec(const ModelStructure& structure, Family family);

/// Everything constant: uniform recruitment, constant s/phi/p, uniform arrival.
ModelStructure constant_structure();
/// The structure used to generate the three-period simulation scenario.
ModelStructure generating_structure();
/// Year-dependent recruitment, constant survival, shared-intercept /
/// year-gradient arrival and retention regressions, year x state capture,
/// year-specific initial state and transition probabilities.
ModelStructure newt_structure();

/// Looks up "constant", "generating" or "newt".
std::optional<ModelStructure> named_structure(std::string_view name);

}  // namespace msstop
