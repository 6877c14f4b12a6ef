#include "msstop/parameters.hpp"

#include <cmath>
#include <string>

#include "msstop/errors.hpp"
#include "msstop/transforms.hpp"

namespace msstop {

namespace {

struct Label {
  const char* family;
  int t = -1;
  const char* suffix = "";
  std::string str() const {
    std::string out = family;
    if (t >= 0) out += "(" + std::to_string(t + 1) + ")";
    return out + suffix;
  }
};

void require_probability(double x, const Label& what) {
  if (!(x >= 0.0 && x <= 1.0)) throw ConstraintError("an entry of " + what.str() + " is not a probability");
}

void require_probabilities(const Eigen::MatrixXd& m, const Label& what) {
  for (Eigen::Index i = 0; i < m.size(); ++i) require_probability(m.data()[i], what);
}

void require_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const Label& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw StructureError(what.str() + " should be " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

template <typename Vector>
void check_simplex(const Vector& v, double tolerance, const Label& what) {
  bool ok = std::abs(v.sum() - 1.0) <= tolerance;
  for (Eigen::Index i = 0; ok && i < v.size(); ++i) ok = v[i] >= 0.0 && v[i] <= 1.0;
  if (!ok) require_simplex(Eigen::VectorXd(v), tolerance, what.str().c_str());
}

}  // namespace

void validate(const ParameterSet& params, const StudyDesign& design, double tolerance) {
  const int T = design.periods();
  const int G = design.states();
  if (!(std::isfinite(params.N) && params.N >= 0.0)) throw ConstraintError("N must be a non-negative number");
  if (params.r.size() != T) throw StructureError("r needs one entry per period");
  check_simplex(params.r, tolerance, {"r"});
  require_shape(params.s, T - 1, design.max_primary_age(), {"s"});
  require_probabilities(params.s, {"s"});

  const auto periods = static_cast<std::size_t>(T);
  if (params.beta.size() != periods || params.phi.size() != periods || params.alpha.size() != periods ||
      params.psi.size() != periods || params.p.size() != periods) {
    throw StructureError("beta, phi, alpha, psi and p need one entry per period");
  }
  for (int t = 0; t < T; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    const int K = design.occasions(t);
    const int ages = design.max_secondary_age(t);
    if (params.beta[ti].size() != K) throw StructureError(Label{"beta", t}.str() + " needs K(t) entries");
    check_simplex(params.beta[ti], tolerance, {"beta", t});

    require_shape(params.phi[ti], K - 1, ages, {"phi", t});
    require_probabilities(params.phi[ti], {"phi", t});

    if (params.alpha[ti].size() != G) throw StructureError(Label{"alpha", t}.str() + " needs G entries");
    check_simplex(params.alpha[ti], tolerance, {"alpha", t});
    require_shape(params.psi[ti], G, G, {"Psi", t});
    for (int g = 0; g < G; ++g) {
      if (!design.available(t, g)) {
        if (params.alpha[ti][g] != 0.0) {
          throw ConstraintError(Label{"alpha", t}.str() + " gives weight to unavailable state " +
                                std::to_string(g + 1));
        }
        for (int i = 0; i < G; ++i) {
          if (params.psi[ti](i, g) != 0.0) {
            throw ConstraintError(Label{"Psi", t}.str() + " moves into unavailable state " + std::to_string(g + 1));
          }
        }
      }
      check_simplex(params.psi[ti].row(g), tolerance, {"Psi", t, " row"});
    }

    if (params.p[ti].size() != static_cast<std::size_t>(K)) {
      throw StructureError(Label{"p", t}.str() + " needs K(t) matrices");
    }
    for (int k = 0; k < K; ++k) {
      const auto& pk = params.p[ti][static_cast<std::size_t>(k)];
      require_shape(pk, G, ages, {"p", t});
      require_probabilities(pk, {"p", t});
    }
  }
}

ParameterSet zero_parameters(const StudyDesign& design) {
  const int T = design.periods();
  const int G = design.states();
  ParameterSet p;
  p.r = Eigen::VectorXd::Zero(T);
  p.s = Eigen::MatrixXd::Zero(T - 1, design.max_primary_age());
  for (int t = 0; t < T; ++t) {
    const int K = design.occasions(t);
    const int ages = design.max_secondary_age(t);
    p.beta.push_back(Eigen::VectorXd::Zero(K));
    p.phi.push_back(Eigen::MatrixXd::Zero(K - 1, ages));
    p.alpha.push_back(Eigen::VectorXd::Zero(G));
    p.psi.push_back(Eigen::MatrixXd::Zero(G, G));
    p.p.emplace_back(static_cast<std::size_t>(K), Eigen::MatrixXd::Zero(G, ages));
  }
  return p;
}

Eigen::VectorXd derived_abundance(const ParameterSet& params, const StudyDesign& design) {
  const int T = design.periods();
  const int max_age = design.max_primary_age();
  Eigen::VectorXd out(T);
  for (int t = 0; t < T; ++t) {
    double total = 0.0;
    for (int b = 0; b <= t; ++b) {
      double alive = params.r[b];
      for (int u = b; u < t && alive > 0.0; ++u) {
        const int age = u - b + 1;
        alive *= age < max_age ? params.s(u, age - 1) : 0.0;
      }
      total += alive;
    }
    out[t] = params.N * total;
  }
  return out;
}

}  // namespace msstop
