#include "msstop/layout.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "msstop/errors.hpp"
#include "msstop/transforms.hpp"

namespace msstop {

namespace {

/// Coordinates of one stored cell of a logit-scale family (0-based, -1 = n/a).
struct Coord {
  int year = -1;
  int occasion = -1;
  int age = -1;
  int state = -1;
};

struct Levels {
  int year = 0;
  int occasion = 0;
  int age = 0;
  int state = 0;
};

enum class PredictorKind { survival, arrival, retention, capture };

const char* kind_name(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::survival: return "s";
    case PredictorKind::arrival: return "beta";
    case PredictorKind::retention: return "phi";
    case PredictorKind::capture: return "p";
  }
  return "";
}

int level_count(const Levels& levels, Factor f) {
  switch (f) {
    case Factor::year: return levels.year;
    case Factor::occasion: return levels.occasion;
    case Factor::age: return levels.age;
    case Factor::state: return levels.state;
  }
  return 0;
}

int coord_of(const Coord& c, Factor f) {
  switch (f) {
    case Factor::year: return c.year;
    case Factor::occasion: return c.occasion;
    case Factor::age: return c.age;
    case Factor::state: return c.state;
  }
  return -1;
}

double covariate_value(const Coord& c, Covariate cov) {
  switch (cov) {
    case Covariate::year: return c.year + 1;
    case Covariate::occasion: return c.occasion + 1;
    case Covariate::age: return c.age;  // a - 1 with a 1-based
    case Covariate::none: break;
  }
  return 1.0;
}

std::string factor_name(Factor f) {
  switch (f) {
    case Factor::year: return "year";
    case Factor::occasion: return "occasion";
    case Factor::age: return "age";
    case Factor::state: return "state";
  }
  return "";
}

/// A linear predictor compiled to sparse rows over the cells of one family.
struct CompiledPredictor {
  PredictorKind kind = PredictorKind::survival;
  int offset = 0;
  int size = 0;
  std::vector<Coord> cells;
  std::vector<int> row_start{0};
  std::vector<int> index;
  std::vector<double> weight;
  std::vector<bool> uses{false, false, false, false};  // year, occasion, age, state
  /// Cells that can influence the likelihood; coefficients no such cell uses are dropped.
  std::vector<bool> reachable;

  double value(std::size_t cell, std::span<const double> theta) const {
    double eta = 0.0;
    for (int i = row_start[cell]; i < row_start[cell + 1]; ++i) {
      eta += weight[static_cast<std::size_t>(i)] * theta[static_cast<std::size_t>(index[static_cast<std::size_t>(i)])];
    }
    return eta;
  }
};

CompiledPredictor compile(PredictorKind kind, const LinearPredictor& predictor, std::vector<Coord> cells,
                          const Levels& levels, int& offset, std::vector<std::string>& names,
                          const std::function<bool(const Coord&)>& reachable = {}) {
  CompiledPredictor out;
  out.kind = kind;
  out.offset = offset;
  out.cells = std::move(cells);
  for (const auto& c : out.cells) out.reachable.push_back(!reachable || reachable(c));
  if (out.cells.empty()) return out;
  if (predictor.terms.empty()) throw StructureError(std::string(kind_name(kind)) + " has no terms");

  struct TermLayout {
    const Term* term;
    int first;
    std::vector<int> radix;
  };
  std::vector<TermLayout> layouts;
  for (const auto& term : predictor.terms) {
    TermLayout tl{&term, offset, {}};
    int count = 1;
    for (Factor f : term.factors) {
      const int n = level_count(levels, f);
      if (n == 0) {
        throw StructureError(std::string(kind_name(kind)) + " cannot depend on " + factor_name(f));
      }
      tl.radix.push_back(n);
      count *= n;
      out.uses[static_cast<std::size_t>(f)] = true;
    }
    if (term.covariate != Covariate::none) {
      const Factor f = term.covariate == Covariate::year       ? Factor::year
                       : term.covariate == Covariate::occasion ? Factor::occasion
                                                               : Factor::age;
      if (level_count(levels, f) == 0) {
        throw StructureError(std::string(kind_name(kind)) + " cannot use a linear " + factor_name(f) + " covariate");
      }
      out.uses[static_cast<std::size_t>(f)] = true;
    }
    // Coefficient names, mixed radix with the first factor varying slowest.
    const std::string base = std::string(kind_name(kind)) + "." + to_string(LinearPredictor{{term}});
    for (int i = 0; i < count; ++i) {
      std::string name = base;
      if (!term.factors.empty()) {
        std::vector<int> digits(term.factors.size());
        int rest = i;
        for (std::size_t d = term.factors.size(); d-- > 0;) {
          digits[d] = rest % tl.radix[d];
          rest /= tl.radix[d];
        }
        name += '[';
        for (std::size_t d = 0; d < digits.size(); ++d) {
          if (d) name += ',';
          name += std::to_string(digits[d] + 1);
        }
        name += ']';
      }
      names.push_back(std::move(name));
    }
    offset += count;
    layouts.push_back(std::move(tl));
  }
  out.size = offset - out.offset;

  for (const auto& c : out.cells) {
    for (const auto& tl : layouts) {
      int idx = 0;
      for (std::size_t d = 0; d < tl.term->factors.size(); ++d) idx = idx * tl.radix[d] + coord_of(c, tl.term->factors[d]);
      const double w = covariate_value(c, tl.term->covariate);
      out.index.push_back(tl.first + idx);
      out.weight.push_back(w);
    }
    out.row_start.push_back(static_cast<int>(out.index.size()));
  }

  std::vector<int> remap(static_cast<std::size_t>(out.size), -1);
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    if (!out.reachable[c]) continue;
    for (int i = out.row_start[c]; i < out.row_start[c + 1]; ++i) {
      if (out.weight[static_cast<std::size_t>(i)] != 0.0) remap[static_cast<std::size_t>(out.index[static_cast<std::size_t>(i)] - out.offset)] = 0;
    }
  }
  int kept = 0;
  for (int i = 0; i < out.size; ++i) {
    auto& r = remap[static_cast<std::size_t>(i)];
    if (r == 0) {
      r = kept;
      names[static_cast<std::size_t>(out.offset + kept)] = names[static_cast<std::size_t>(out.offset + i)];
      ++kept;
    }
  }
  if (kept < out.size) {
    names.resize(static_cast<std::size_t>(out.offset + kept));
    std::vector<int> row_start{0};
    std::vector<int> index;
    std::vector<double> weight;
    for (std::size_t c = 0; c < out.cells.size(); ++c) {
      for (int i = out.row_start[c]; i < out.row_start[c + 1]; ++i) {
        const int r = remap[static_cast<std::size_t>(out.index[static_cast<std::size_t>(i)] - out.offset)];
        if (r < 0) continue;
        index.push_back(out.offset + r);
        weight.push_back(out.weight[static_cast<std::size_t>(i)]);
      }
      row_start.push_back(static_cast<int>(index.size()));
    }
    out.row_start = std::move(row_start);
    out.index = std::move(index);
    out.weight = std::move(weight);
    out.size = kept;
    offset = out.offset + kept;
  }
  return out;
}

std::vector<int> available_states(const StudyDesign& design, int t) {
  std::vector<int> out;
  for (int g = 0; g < design.states(); ++g) {
    if (design.available(t, g)) out.push_back(g);
  }
  return out;
}

/// Least-squares solve of X c = y; minimum-norm for rank-deficient X.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.cols() == 0) return Eigen::VectorXd(0);
  return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(X).solve(y);
}

std::string label(const std::string& family, std::initializer_list<std::pair<const char*, int>> dims) {
  std::string out = family;
  bool first = true;
  for (const auto& [key, value] : dims) {
    if (value < 0) continue;
    out += first ? '[' : ',';
    first = false;
    out += key;
    out += '=';
    out += std::to_string(value + 1);
  }
  if (!first) out += ']';
  return out;
}

}  // namespace

struct StructureLayout::Impl {
  ModelStructure structure;
  StudyDesign design;
  std::vector<std::string> names;

  int recruitment_offset = 0;
  CompiledPredictor survival;
  int arrival_offset = 0;  // by_year form
  CompiledPredictor arrival;
  CompiledPredictor retention;
  int alpha_offset = 0;
  int psi_offset = 0;
  CompiledPredictor capture;

  Impl(ModelStructure s, StudyDesign d) : structure(std::move(s)), design(std::move(d)) {
    const int T = design.periods();
    const int G = design.states();
    int offset = 0;
    names.emplace_back("N.log_excess");
    ++offset;

    recruitment_offset = offset;
    if (structure.recruitment == SimplexForm::by_year) {
      for (int t = 0; t + 1 < T; ++t) names.push_back("r.logit[" + std::to_string(t + 1) + "]");
      offset += T - 1;
    } else if (structure.recruitment == SimplexForm::shared) {
      throw StructureError("recruitment is a single simplex; use uniform or year");
    }

    {
      std::vector<Coord> cells;
      for (int t = 0; t + 1 < T; ++t) {
        for (int a = 0; a < design.max_primary_age(); ++a) cells.push_back({t, -1, a, -1});
      }
      const int max_age = design.max_primary_age();
      survival = compile(PredictorKind::survival, structure.survival, std::move(cells),
                         {T - 1, 0, max_age, 0}, offset, names,
                         [max_age](const Coord& c) { return c.age <= c.year && c.age + 1 < max_age; });
    }

    arrival_offset = offset;
    if (structure.arrival == ArrivalForm::by_year) {
      for (int t = 0; t < T; ++t) {
        for (int k = 0; k + 1 < design.occasions(t); ++k) {
          names.push_back("beta.logit[" + std::to_string(t + 1) + "," + std::to_string(k + 1) + "]");
        }
        offset += design.occasions(t) - 1;
      }
    } else if (structure.arrival == ArrivalForm::logistic) {
      std::vector<Coord> cells;
      for (int t = 0; t < T; ++t) {
        for (int k = 0; k < design.occasions(t); ++k) cells.push_back({t, k, -1, -1});
      }
      arrival = compile(PredictorKind::arrival, structure.arrival_predictor, std::move(cells),
                        {T, design.max_occasions(), 0, 0}, offset, names);
    }

    {
      std::vector<Coord> cells;
      for (int t = 0; t < T; ++t) {
        for (int k = 0; k + 1 < design.occasions(t); ++k) {
          for (int a = 0; a < design.max_secondary_age(t); ++a) cells.push_back({t, k, a, -1});
        }
      }
      retention = compile(PredictorKind::retention, structure.retention, std::move(cells),
                          {T, design.max_occasions() - 1, design.max_secondary_age(), 0}, offset, names,
                          [this](const Coord& c) {
                            return c.age <= c.occasion && c.age + 1 < design.max_secondary_age(c.year);
                          });
    }

    alpha_offset = offset;
    if (structure.initial_state == SimplexForm::shared) {
      for (int g = 0; g + 1 < G; ++g) names.push_back("alpha.logit[" + std::to_string(g + 1) + "]");
      offset += G - 1;
    } else if (structure.initial_state == SimplexForm::by_year) {
      for (int t = 0; t < T; ++t) {
        const auto avail = available_states(design, t);
        for (std::size_t i = 0; i + 1 < avail.size(); ++i) {
          names.push_back("alpha.logit[" + std::to_string(t + 1) + "," + std::to_string(avail[i] + 1) + "]");
        }
        offset += static_cast<int>(avail.size()) - 1;
      }
    }

    psi_offset = offset;
    if (structure.transition == SimplexForm::shared) {
      for (int i = 0; i < G; ++i) {
        for (int j = 0; j + 1 < G; ++j) {
          names.push_back("psi.logit[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]");
        }
      }
      offset += G * (G - 1);
    } else if (structure.transition == SimplexForm::by_year) {
      for (int t = 0; t < T; ++t) {
        const auto avail = available_states(design, t);
        for (int i : avail) {
          for (std::size_t j = 0; j + 1 < avail.size(); ++j) {
            names.push_back("psi.logit[" + std::to_string(t + 1) + "," + std::to_string(i + 1) + "," +
                            std::to_string(avail[j] + 1) + "]");
          }
        }
        offset += static_cast<int>(avail.size() * (avail.size() - 1));
      }
    }

    {
      std::vector<Coord> cells;
      for (int t = 0; t < T; ++t) {
        for (int k = 0; k < design.occasions(t); ++k) {
          for (int g = 0; g < G; ++g) {
            for (int a = 0; a < design.max_secondary_age(t); ++a) cells.push_back({t, k, a, g});
          }
        }
      }
      capture = compile(PredictorKind::capture, structure.capture, std::move(cells),
                        {T, design.max_occasions(), design.max_secondary_age(), G}, offset, names,
                        [this](const Coord& c) { return c.age <= c.occasion && design.available(c.year, c.state); });
    }
  }

  // Shared simplex over all G states, before availability restriction.
  Eigen::VectorXd shared_alpha(std::span<const double> theta) const {
    return simplex_from_logits(theta.subspan(static_cast<std::size_t>(alpha_offset),
                                             static_cast<std::size_t>(design.states() - 1)));
  }

  Eigen::MatrixXd shared_psi(std::span<const double> theta) const {
    const int G = design.states();
    Eigen::MatrixXd out(G, G);
    for (int i = 0; i < G; ++i) {
      out.row(i) = simplex_from_logits(theta.subspan(static_cast<std::size_t>(psi_offset + i * (G - 1)),
                                                     static_cast<std::size_t>(G - 1)))
                       .transpose();
    }
    return out;
  }

  static Eigen::VectorXd restrict(const Eigen::VectorXd& full, const std::vector<int>& avail) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(full.size());
    double total = 0.0;
    for (int g : avail) total += full[g];
    for (int g : avail) out[g] = full[g] / total;
    return out;
  }

  ParameterSet expand(std::span<const double> theta, long observed) const {
    const int T = design.periods();
    const int G = design.states();
    ParameterSet p = zero_parameters(design);
    p.N = static_cast<double>(observed) + std::exp(theta[0]);

    if (structure.recruitment == SimplexForm::by_year) {
      p.r = simplex_from_logits(theta.subspan(static_cast<std::size_t>(recruitment_offset), static_cast<std::size_t>(T - 1)));
    } else {
      p.r.setConstant(1.0 / T);
    }

    for (std::size_t c = 0; c < survival.cells.size(); ++c) {
      const auto& cell = survival.cells[c];
      p.s(cell.year, cell.age) = inv_logit(survival.value(c, theta));
    }

    switch (structure.arrival) {
      case ArrivalForm::uniform:
        for (int t = 0; t < T; ++t) p.beta[static_cast<std::size_t>(t)].setConstant(1.0 / design.occasions(t));
        break;
      case ArrivalForm::by_year: {
        int off = arrival_offset;
        for (int t = 0; t < T; ++t) {
          const int K = design.occasions(t);
          p.beta[static_cast<std::size_t>(t)] =
              simplex_from_logits(theta.subspan(static_cast<std::size_t>(off), static_cast<std::size_t>(K - 1)));
          off += K - 1;
        }
        break;
      }
      case ArrivalForm::logistic: {
        std::size_t c = 0;
        for (int t = 0; t < T; ++t) {
          Eigen::VectorXd eta(design.occasions(t));
          for (int k = 0; k < design.occasions(t); ++k, ++c) eta[k] = arrival.value(c, theta);
          p.beta[static_cast<std::size_t>(t)] = normalized_logistic_weights(eta);
        }
        break;
      }
    }

    for (std::size_t c = 0; c < retention.cells.size(); ++c) {
      const auto& cell = retention.cells[c];
      p.phi[static_cast<std::size_t>(cell.year)](cell.occasion, cell.age) = inv_logit(retention.value(c, theta));
    }

    const Eigen::VectorXd alpha_all = structure.initial_state == SimplexForm::shared ? shared_alpha(theta)
                                                                                     : Eigen::VectorXd::Ones(G);
    const Eigen::MatrixXd psi_all = structure.transition == SimplexForm::shared ? shared_psi(theta)
                                                                                : Eigen::MatrixXd::Ones(G, G);
    int alpha_off = alpha_offset;
    int psi_off = psi_offset;
    for (int t = 0; t < T; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      const auto avail = available_states(design, t);
      const auto m = avail.size();
      if (structure.initial_state == SimplexForm::by_year) {
        const auto local = simplex_from_logits(theta.subspan(static_cast<std::size_t>(alpha_off), m - 1));
        for (std::size_t i = 0; i < m; ++i) p.alpha[ti][avail[i]] = local[static_cast<Eigen::Index>(i)];
        alpha_off += static_cast<int>(m) - 1;
      } else {
        p.alpha[ti] = restrict(alpha_all, avail);
      }
      for (int i = 0; i < G; ++i) {
        const bool row_free = structure.transition == SimplexForm::by_year && design.available(t, i);
        if (row_free) {
          const auto local = simplex_from_logits(theta.subspan(static_cast<std::size_t>(psi_off), m - 1));
          for (std::size_t j = 0; j < m; ++j) p.psi[ti](i, avail[j]) = local[static_cast<Eigen::Index>(j)];
          psi_off += static_cast<int>(m) - 1;
        } else {
          const Eigen::VectorXd full = structure.transition == SimplexForm::shared
                                           ? Eigen::VectorXd(psi_all.row(i).transpose())
                                           : Eigen::VectorXd::Ones(G);
          p.psi[ti].row(i) = restrict(full, avail).transpose();
        }
      }
    }

    for (std::size_t c = 0; c < capture.cells.size(); ++c) {
      const auto& cell = capture.cells[c];
      p.p[static_cast<std::size_t>(cell.year)][static_cast<std::size_t>(cell.occasion)](cell.state, cell.age) =
          design.available(cell.year, cell.state) ? inv_logit(capture.value(c, theta)) : 0.0;
    }
    return p;
  }

  static void solve_logit_block(const CompiledPredictor& cp, const std::vector<double>& values,
                                std::vector<double>& theta) {
    if (cp.size == 0) return;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cp.cells.size()), cp.size);
    Eigen::VectorXd y(static_cast<Eigen::Index>(cp.cells.size()));
    for (std::size_t c = 0; c < cp.cells.size(); ++c) {
      if (!cp.reachable[c]) continue;
      const double v = values[c];
      if (!(v > 0.0 && v < 1.0)) {
        throw ConstraintError(std::string(kind_name(cp.kind)) + " has a boundary value with no logit preimage");
      }
      y[static_cast<Eigen::Index>(c)] = logit(v);
      for (int i = cp.row_start[c]; i < cp.row_start[c + 1]; ++i) {
        X(static_cast<Eigen::Index>(c), cp.index[static_cast<std::size_t>(i)] - cp.offset) +=
            cp.weight[static_cast<std::size_t>(i)];
      }
    }
    const Eigen::VectorXd coef = least_squares(X, y);
    for (int i = 0; i < cp.size; ++i) theta[static_cast<std::size_t>(cp.offset + i)] = coef[i];
  }

  /// Shared log-weights w (w_G = 0) from per-period renormalized simplexes.
  Eigen::VectorXd shared_logits(const std::vector<Eigen::VectorXd>& per_period) const {
    const int G = design.states();
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    for (int t = 0; t < design.periods(); ++t) {
      const auto avail = available_states(design, t);
      const int ref = avail.back();
      for (int g : avail) {
        if (g == ref) continue;
        const auto& x = per_period[static_cast<std::size_t>(t)];
        if (!(x[g] > 0.0 && x[ref] > 0.0)) throw ConstraintError("simplex entries must be positive");
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(G);
        row[g] += 1.0;
        row[ref] -= 1.0;
        rows.push_back(row);
        rhs.push_back(std::log(x[g]) - std::log(x[ref]));
      }
    }
    if (rows.empty()) return Eigen::VectorXd::Zero(G - 1);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), G - 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      X.row(static_cast<Eigen::Index>(i)) = rows[i].head(G - 1);
      y[static_cast<Eigen::Index>(i)] = rhs[i];
    }
    return least_squares(X, y);
  }

  void solve_logistic_arrival(const ParameterSet& params, std::vector<double>& theta) const {
    if (arrival.size == 0) return;
    const auto off = static_cast<std::size_t>(arrival.offset);
    const auto n = static_cast<std::size_t>(arrival.size);
    Eigen::VectorXd target(static_cast<Eigen::Index>(arrival.cells.size()));
    {
      Eigen::Index c = 0;
      for (const auto& b : params.beta) {
        for (Eigen::Index k = 0; k < b.size(); ++k) target[c++] = std::log(std::max(b[k], 1e-300));
      }
    }
    // Residuals on the log scale keep small weights and saturated tails informative.
    auto residual = [&](const std::vector<double>& th) {
      Eigen::VectorXd out(target.size());
      std::size_t c = 0;
      for (int t = 0; t < design.periods(); ++t) {
        Eigen::VectorXd eta(design.occasions(t));
        for (int k = 0; k < design.occasions(t); ++k) eta[k] = arrival.value(c + static_cast<std::size_t>(k), th);
        const auto w = normalized_logistic_weights(eta);
        for (int k = 0; k < design.occasions(t); ++k, ++c) {
          out[static_cast<Eigen::Index>(c)] = std::log(w[k]) - target[static_cast<Eigen::Index>(c)];
        }
      }
      return out;
    };
    // Levenberg-Marquardt with a forward-difference Jacobian.
    auto solve = [&](std::vector<double> th) {
      double lambda = 1e-3;
      Eigen::VectorXd res = residual(th);
      for (int iter = 0; iter < 500 && res.lpNorm<Eigen::Infinity>() > 1e-14; ++iter) {
        Eigen::MatrixXd J(res.size(), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
          auto probe = th;
          const double h = 1e-7 * std::max(1.0, std::abs(probe[off + i]));
          probe[off + i] += h;
          J.col(static_cast<Eigen::Index>(i)) = (residual(probe) - res) / h;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * res;
        bool improved = false;
        for (int tries = 0; tries < 30; ++tries) {
          Eigen::MatrixXd A = JtJ;
          A.diagonal().array() += lambda * (1.0 + JtJ.diagonal().array());
          const Eigen::VectorXd step = A.ldlt().solve(-g);
          auto trial_theta = th;
          for (std::size_t i = 0; i < n; ++i) trial_theta[off + i] += step[static_cast<Eigen::Index>(i)];
          const auto trial = residual(trial_theta);
          if (trial.squaredNorm() < res.squaredNorm()) {
            th = std::move(trial_theta);
            res = trial;
            lambda = std::max(lambda * 0.3, 1e-12);
            improved = true;
            break;
          }
          lambda *= 10.0;
        }
        if (!improved) break;
      }
      return std::make_pair(res.squaredNorm(), std::move(th));
    };

    // The saturated regimes of the inverse logit create separate basins, so
    // LM passes alternate with a grid scan over each coefficient.
    std::vector<double> th = theta;
    for (std::size_t i = 0; i < n; ++i) th[off + i] = 0.0;
    auto [value, solved] = solve(std::move(th));
    th = std::move(solved);
    for (int cycle = 0; cycle < 8 && value > 1e-24; ++cycle) {
      for (std::size_t i = 0; i < n; ++i) {
        double best = residual(th).squaredNorm();
        double best_x = th[off + i];
        auto probe = th;
        for (int g = -80; g <= 80; ++g) {
          probe[off + i] = 0.1 * g;
          const double v = residual(probe).squaredNorm();
          if (v < best) {
            best = v;
            best_x = probe[off + i];
          }
        }
        th[off + i] = best_x;
      }
      std::tie(value, solved) = solve(std::move(th));
      th = std::move(solved);
    }
    theta = std::move(th);
  }

  std::vector<double> to_unconstrained(const ParameterSet& params, long observed) const {
    validate(params, design);
    const int T = design.periods();
    const int G = design.states();
    std::vector<double> theta(names.size(), 0.0);
    const double excess = params.N - static_cast<double>(observed);
    if (!(excess > 0.0)) throw ConstraintError("N must exceed the observed count to have a log-scale preimage");
    theta[0] = std::log(excess);

    if (structure.recruitment == SimplexForm::by_year) {
      const auto l = logits_from_simplex(params.r);
      for (int t = 0; t + 1 < T; ++t) theta[static_cast<std::size_t>(recruitment_offset + t)] = l[t];
    }

    {
      std::vector<double> v;
      for (const auto& c : survival.cells) v.push_back(params.s(c.year, c.age));
      solve_logit_block(survival, v, theta);
    }

    if (structure.arrival == ArrivalForm::by_year) {
      int off = arrival_offset;
      for (int t = 0; t < T; ++t) {
        const auto l = logits_from_simplex(params.beta[static_cast<std::size_t>(t)]);
        for (Eigen::Index k = 0; k < l.size(); ++k) theta[static_cast<std::size_t>(off++)] = l[k];
      }
    } else if (structure.arrival == ArrivalForm::logistic) {
      solve_logistic_arrival(params, theta);
    }

    {
      std::vector<double> v;
      for (const auto& c : retention.cells) v.push_back(params.phi[static_cast<std::size_t>(c.year)](c.occasion, c.age));
      solve_logit_block(retention, v, theta);
    }

    if (structure.initial_state == SimplexForm::shared) {
      const auto w = shared_logits(params.alpha);
      for (int g = 0; g + 1 < G; ++g) theta[static_cast<std::size_t>(alpha_offset + g)] = w[g];
    } else if (structure.initial_state == SimplexForm::by_year) {
      int off = alpha_offset;
      for (int t = 0; t < T; ++t) {
        const auto avail = available_states(design, t);
        Eigen::VectorXd local(static_cast<Eigen::Index>(avail.size()));
        for (std::size_t i = 0; i < avail.size(); ++i) local[static_cast<Eigen::Index>(i)] = params.alpha[static_cast<std::size_t>(t)][avail[i]];
        const auto l = logits_from_simplex(local);
        for (Eigen::Index i = 0; i < l.size(); ++i) theta[static_cast<std::size_t>(off++)] = l[i];
      }
    }

    if (structure.transition == SimplexForm::shared) {
      for (int i = 0; i < G; ++i) {
        std::vector<Eigen::VectorXd> rows;
        for (int t = 0; t < T; ++t) rows.push_back(params.psi[static_cast<std::size_t>(t)].row(i).transpose());
        const auto w = shared_logits(rows);
        for (int j = 0; j + 1 < G; ++j) theta[static_cast<std::size_t>(psi_offset + i * (G - 1) + j)] = w[j];
      }
    } else if (structure.transition == SimplexForm::by_year) {
      int off = psi_offset;
      for (int t = 0; t < T; ++t) {
        const auto avail = available_states(design, t);
        for (int i : avail) {
          Eigen::VectorXd local(static_cast<Eigen::Index>(avail.size()));
          for (std::size_t j = 0; j < avail.size(); ++j) local[static_cast<Eigen::Index>(j)] = params.psi[static_cast<std::size_t>(t)](i, avail[j]);
          const auto l = logits_from_simplex(local);
          for (Eigen::Index j = 0; j < l.size(); ++j) theta[static_cast<std::size_t>(off++)] = l[j];
        }
      }
    }

    {
      std::vector<double> v;
      for (const auto& c : capture.cells) {
        v.push_back(params.p[static_cast<std::size_t>(c.year)][static_cast<std::size_t>(c.occasion)](c.state, c.age));
      }
      solve_logit_block(capture, v, theta);
    }
    return theta;
  }

  static void report_grouped(const CompiledPredictor& cp, const std::string& family, std::span<const double> theta,
                             std::vector<ReportedValue>& out) {
    std::map<std::vector<std::pair<int, double>>, bool> seen;
    for (std::size_t c = 0; c < cp.cells.size(); ++c) {
      const auto& cell = cp.cells[c];
      if (!cp.reachable[c]) continue;
      std::vector<std::pair<int, double>> key;
      for (int i = cp.row_start[c]; i < cp.row_start[c + 1]; ++i) {
        key.emplace_back(cp.index[static_cast<std::size_t>(i)], cp.weight[static_cast<std::size_t>(i)]);
      }
      std::sort(key.begin(), key.end());
      if (!seen.emplace(std::move(key), true).second) continue;
      const auto dim = [&](Factor f, int v) { return cp.uses[static_cast<std::size_t>(f)] ? v : -1; };
      out.push_back({label(family, {{"year", dim(Factor::year, cell.year)},
                                    {"occasion", dim(Factor::occasion, cell.occasion)},
                                    {"age", dim(Factor::age, cell.age)},
                                    {"state", dim(Factor::state, cell.state)}}),
                     inv_logit(cp.value(c, theta))});
    }
  }

  std::vector<ReportedValue> report(std::span<const double> theta, long observed) const {
    const ParameterSet p = expand(theta, observed);
    const int T = design.periods();
    const int G = design.states();
    std::vector<ReportedValue> out;
    out.push_back({"N", p.N});
    const auto abundance = derived_abundance(p, design);
    for (int t = 0; t < T; ++t) out.push_back({label("N", {{"year", t}}), abundance[t]});
    if (structure.recruitment == SimplexForm::by_year) {
      for (int t = 0; t < T; ++t) out.push_back({label("r", {{"year", t}}), p.r[t]});
    }
    report_grouped(survival, "s", theta, out);
    if (structure.arrival != ArrivalForm::uniform) {
      for (int t = 0; t < T; ++t) {
        for (int k = 0; k < design.occasions(t); ++k) {
          out.push_back({label("beta", {{"year", t}, {"occasion", k}}), p.beta[static_cast<std::size_t>(t)][k]});
        }
      }
    }
    report_grouped(retention, "phi", theta, out);
    if (G > 1) {
      if (structure.initial_state == SimplexForm::shared) {
        const auto a = shared_alpha(theta);
        for (int g = 0; g < G; ++g) out.push_back({label("alpha", {{"state", g}}), a[g]});
      } else if (structure.initial_state == SimplexForm::by_year) {
        for (int t = 0; t < T; ++t) {
          if (design.available_count(t) < 2) continue;
          for (int g : available_states(design, t)) {
            out.push_back({label("alpha", {{"year", t}, {"state", g}}), p.alpha[static_cast<std::size_t>(t)][g]});
          }
        }
      }
      if (structure.transition == SimplexForm::shared) {
        const auto m = shared_psi(theta);
        for (int i = 0; i < G; ++i) {
          for (int j = 0; j < G; ++j) out.push_back({label("psi", {{"from", i}, {"to", j}}), m(i, j)});
        }
      } else if (structure.transition == SimplexForm::by_year) {
        for (int t = 0; t < T; ++t) {
          if (design.available_count(t) < 2) continue;
          const auto avail = available_states(design, t);
          for (int i : avail) {
            for (int j : avail) {
              out.push_back({label("psi", {{"year", t}, {"from", i}, {"to", j}}), p.psi[static_cast<std::size_t>(t)](i, j)});
            }
          }
        }
      }
    }
    report_grouped(capture, "p", theta, out);
    return out;
  }
};

StructureLayout::StructureLayout(ModelStructure structure, StudyDesign design)
    : impl_(std::make_unique<Impl>(std::move(structure), std::move(design))) {}
StructureLayout::~StructureLayout() = default;
StructureLayout::StructureLayout(const StructureLayout& other) : impl_(std::make_unique<Impl>(*other.impl_)) {}
StructureLayout& StructureLayout::operator=(const StructureLayout& other) {
  if (this != &other) impl_ = std::make_unique<Impl>(*other.impl_);
  return *this;
}
StructureLayout::StructureLayout(StructureLayout&&) noexcept = default;
StructureLayout& StructureLayout::operator=(StructureLayout&&) noexcept = default;

std::size_t StructureLayout::dimension() const noexcept { return impl_->names.size(); }
const std::vector<std::string>& StructureLayout::names() const noexcept { return impl_->names; }
const ModelStructure& StructureLayout::structure() const noexcept { return impl_->structure; }
const StudyDesign& StructureLayout::design() const noexcept { return impl_->design; }

ParameterSet StructureLayout::expand(std::span<const double> theta, long observed) const {
  if (theta.size() != dimension()) {
    throw StructureError("theta has " + std::to_string(theta.size()) + " entries, the structure declares " +
                         std::to_string(dimension()));
  }
  return impl_->expand(theta, observed);
}

std::vector<double> StructureLayout::to_unconstrained(const ParameterSet& params, long observed) const {
  return impl_->to_unconstrained(params, observed);
}

std::vector<ReportedValue> StructureLayout::report(std::span<const double> theta, long observed) const {
  if (theta.size() != dimension()) throw StructureError("theta length does not match the structure");
  return impl_->report(theta, observed);
}

std::vector<double> StructureLayout::default_start(long observed) const {
  std::vector<double> theta(dimension(), 0.0);
  theta[0] = std::log(std::max(1.0, static_cast<double>(observed) / 5.0));
  return theta;
}

ParameterSet expand_structure(const ModelStructure& structure, std::span<const double> theta,
                              const StudyDesign& design, long observed) {
  return StructureLayout(structure, design).expand(theta, observed);
}

}  // namespace msstop
