#include <cmath>
#include <map>
#include <fmt/format.h>
#include <sstream>

#include "msstop/errors.hpp"
#include "msstop/io.hpp"

namespace msstop {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(std::move(row));
  }
  return rows;
}

constexpr const char* kIndexKeys[] = {"year", "occasion", "age", "state", "from", "to"};

// "beta[year=1,occasion=2]" -> ("beta", {year: 1, occasion: 2}).
std::pair<std::string, std::map<std::string, std::string>> split_name(const std::string& name) {
  const auto open = name.find('[');
  if (open == std::string::npos || name.back() != ']') return {name, {}};
  std::map<std::string, std::string> index;
  std::istringstream in(name.substr(open + 1, name.size() - open - 2));
  for (std::string item; std::getline(in, item, ',');) {
    const auto eq = item.find('=');
    if (eq != std::string::npos) index[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return {name.substr(0, open), index};
}

json index_json(const std::string& name) {
  json index = json::object();
  for (const auto& [key, value] : split_name(name).second) index[key] = std::stoi(value);
  return index;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(0, std::string("parameters: missing '") + key + "'");
  return j.at(key);
}

Eigen::VectorXd read_vector(const json& j, Eigen::Index size, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw ParseError(0, "parameters: " + what + " must have length " + std::to_string(size));
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

Eigen::MatrixXd read_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw ParseError(0, "parameters: " + what + " must have " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    m.row(i) = read_vector(j.at(static_cast<std::size_t>(i)), cols, what + " row").transpose();
  }
  return m;
}

template <class T>
const json& period(const json& j, std::size_t t, const std::vector<T>& shape, const std::string& what) {
  if (!j.is_array() || j.size() != shape.size()) {
    throw ParseError(0, "parameters: " + what + " must list " + std::to_string(shape.size()) + " periods");
  }
  return j.at(t);
}

}  // namespace

json to_json(const StudyDesign& design) {
  return {{"T", design.periods()},
          {"K", design.occasions()},
          {"G", design.states()},
          {"availability", design.availability()},
          {"max_primary_age", design.max_primary_age()},
          {"max_secondary_age", design.max_secondary_ages()},
          {"header", design_header(design)}};
}

json to_json(const ParameterSet& params) {
  json beta = json::array(), phi = json::array(), alpha = json::array(), psi = json::array(), p = json::array();
  for (const auto& v : params.beta) beta.push_back(vector_json(v));
  for (const auto& m : params.phi) phi.push_back(matrix_json(m));
  for (const auto& v : params.alpha) alpha.push_back(vector_json(v));
  for (const auto& m : params.psi) psi.push_back(matrix_json(m));
  for (const auto& period : params.p) {
    json occasions = json::array();
    for (const auto& m : period) occasions.push_back(matrix_json(m));
    p.push_back(std::move(occasions));
  }
  return {{"N", params.N},         {"r", vector_json(params.r)}, {"s", matrix_json(params.s)},
          {"beta", std::move(beta)}, {"phi", std::move(phi)},      {"alpha", std::move(alpha)},
          {"psi", std::move(psi)},   {"p", std::move(p)}};
}

ParameterSet parameters_from_json(const json& j, const StudyDesign& design) {
  ParameterSet out = zero_parameters(design);
  try {
    out.N = field(j, "N").get<double>();
    out.r = read_vector(field(j, "r"), out.r.size(), "r");
    out.s = read_matrix(field(j, "s"), out.s.rows(), out.s.cols(), "s");
    for (std::size_t t = 0; t < out.beta.size(); ++t) {
      const auto ts = "[" + std::to_string(t + 1) + "]";
      out.beta[t] = read_vector(period(field(j, "beta"), t, out.beta, "beta"), out.beta[t].size(), "beta" + ts);
      out.phi[t] = read_matrix(period(field(j, "phi"), t, out.phi, "phi"), out.phi[t].rows(), out.phi[t].cols(),
                               "phi" + ts);
      out.alpha[t] = read_vector(period(field(j, "alpha"), t, out.alpha, "alpha"), out.alpha[t].size(), "alpha" + ts);
      out.psi[t] = read_matrix(period(field(j, "psi"), t, out.psi, "psi"), out.psi[t].rows(), out.psi[t].cols(),
                               "psi" + ts);
      const json& pt = period(field(j, "p"), t, out.p, "p");
      for (std::size_t k = 0; k < out.p[t].size(); ++k) {
        auto& m = out.p[t][k];
        m = read_matrix(period(pt, k, out.p[t], "p" + ts), m.rows(), m.cols(), "p" + ts);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("parameters: ") + e.what());
  }
  validate(out, design, 1e-9);
  return out;
}

json to_json(const FitResult& fit, const StructureLayout& layout, long observed) {
  json estimates = json::array();
  for (const auto& v : layout.report(fit.theta_hat, observed)) {
    estimates.push_back({{"name", v.name}, {"family", split_name(v.name).first}, {"index", index_json(v.name)},
                         {"value", v.value}});
  }
  json theta = json::array();
  for (std::size_t i = 0; i < fit.theta_hat.size(); ++i) theta.push_back({{"name", fit.names[i]}, {"value", fit.theta_hat[i]}});
  const auto abundance = derived_abundance(fit);
  return {{"structure", to_string(fit.structure)},
          {"loglik", fit.loglik},
          {"n_params", fit.n_params},
          {"aic", fit.aic},
          {"converged", fit.converged},
          {"starts_run", fit.starts_run},
          {"starts_converged", fit.starts_converged},
          {"optimizer",
           {{"method", fit.optimizer.method},
            {"iterations", fit.optimizer.iterations},
            {"evaluations", fit.optimizer.evaluations},
            {"gradient_max_abs", fit.optimizer.gradient_norm},
            {"message", fit.optimizer.message}}},
          {"boundary", fit.boundary},
          {"observed", observed},
          {"derived_abundance", vector_json(abundance)},
          {"estimates", std::move(estimates)},
          {"theta", std::move(theta)},
          {"params", to_json(fit.params_hat)}};
}

json to_json(const BootstrapResult& result) {
  json summaries = json::array();
  for (const auto& s : result.summaries) {
    summaries.push_back({{"name", s.name},
                         {"family", split_name(s.name).first},
                         {"index", index_json(s.name)},
                         {"estimate", s.estimate},
                         {"se", s.se},
                         {"ci_low", s.lower},
                         {"ci_high", s.upper},
                         {"formatted", format_estimate(s.estimate, s.se)}});
  }
  return {{"replicates", result.replicates},
          {"failures", result.failures},
          {"converged", result.converged},
          {"summaries", std::move(summaries)},
          {"values", result.values}};
}

json to_json(const SelectionResult& result) {
  json trace = json::array();
  for (const auto& step : result.trace) {
    trace.push_back({{"round", step.round},
                     {"move", step.move},
                     {"structure", to_string(step.structure)},
                     {"loglik", step.loglik},
                     {"aic", step.aic},
                     {"n_params", step.n_params},
                     {"converged", step.converged},
                     {"accepted", step.accepted}});
  }
  return {{"trace", std::move(trace)}, {"best", to_string(result.best)}};
}

json truth_json(const SimTruth& truth, const StudyDesign& design) {
  json individuals = json::array();
  for (const auto& ind : truth.individuals) {
    individuals.push_back({{"recruited", ind.recruited + 1},
                           {"last_period", ind.last_period + 1},
                           {"captured", ind.captured},
                           {"arrival", ind.arrival},
                           {"departure", ind.departure},
                           {"states", ind.states}});
  }
  return {{"seed", truth.seed},
          {"design", to_json(design)},
          {"params", to_json(truth.params)},
          {"abundance", truth.abundance},
          {"individuals", std::move(individuals)}};
}

std::string estimates_table(const std::vector<ReportedValue>& values, const std::vector<BootstrapSummary>* summaries) {
  std::size_t width = 9;
  for (const auto& v : values) width = std::max(width, v.name.size());
  std::ostringstream out;
  auto cell = [](double x) { return std::isfinite(x) ? fmt::format("{:>12.6g}", x) : fmt::format("{:>12}", "NA"); };
  out << fmt::format("{:<{}}  {:<6}", "parameter", width, "family");
  for (const char* key : kIndexKeys) out << fmt::format(" {:>8}", key);
  out << fmt::format("  {:>12}", "estimate");
  if (summaries) out << fmt::format("  {:>12}  {:>12}  {:>12}  {}", "se", "ci_low", "ci_high", "report");
  out << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto [family, index] = split_name(values[i].name);
    out << fmt::format("{:<{}}  {:<6}", values[i].name, width, family);
    for (const char* key : kIndexKeys) {
      const auto it = index.find(key);
      out << fmt::format(" {:>8}", it == index.end() ? "." : it->second);
    }
    out << "  " << cell(values[i].value);
    if (summaries) {
      const auto& s = (*summaries)[i];
      out << "  " << cell(s.se) << "  " << cell(s.lower) << "  " << cell(s.upper) << "  "
          << format_estimate(s.estimate, s.se);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace msstop
