#include "oracle.hpp"

#include <algorithm>
#include <cmath>

#include "msstop/brute_force.hpp"
#include "msstop/hmm.hpp"

namespace msstop::cli {
namespace {

double probability(RandomStream& rng) { return 0.05 + 0.9 * rng.uniform(); }

Eigen::VectorXd simplex(RandomStream& rng, int size, const std::vector<bool>& support) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(size);
  for (int i = 0; i < size; ++i) {
    if (support.empty() || support[static_cast<std::size_t>(i)]) x[i] = 0.05 - std::log(1.0 - rng.uniform());
  }
  return x / x.sum();
}

}  // namespace

ParameterSet random_parameters(const StudyDesign& design, RandomStream& rng, double N) {
  ParameterSet p = zero_parameters(design);
  p.N = N;
  p.r = simplex(rng, design.periods(), {});
  for (Eigen::Index i = 0; i < p.s.size(); ++i) p.s.data()[i] = probability(rng);
  for (int t = 0; t < design.periods(); ++t) {
    const auto ti = static_cast<std::size_t>(t);
    const auto& avail = design.availability()[ti];
    p.beta[ti] = simplex(rng, design.occasions(t), {});
    for (Eigen::Index i = 0; i < p.phi[ti].size(); ++i) p.phi[ti].data()[i] = probability(rng);
    p.alpha[ti] = simplex(rng, design.states(), avail);
    for (int g = 0; g < design.states(); ++g) {
      p.psi[ti].row(g) = simplex(rng, design.states(), avail).transpose();
    }
    for (auto& m : p.p[ti]) {
      for (int g = 0; g < design.states(); ++g) {
        for (Eigen::Index a = 0; a < m.cols(); ++a) m(g, a) = avail[static_cast<std::size_t>(g)] ? probability(rng) : 0.0;
      }
    }
  }
  return p;
}

std::vector<CaptureHistory> enumerate_histories(const StudyDesign& design) {
  std::vector<std::vector<std::uint8_t>> choices;
  for (int t = 0; t < design.periods(); ++t) {
    std::vector<std::uint8_t> outcomes{0};
    for (int g = 0; g < design.states(); ++g) {
      if (design.available(t, g)) outcomes.push_back(static_cast<std::uint8_t>(g + 1));
    }
    for (int k = 0; k < design.occasions(t); ++k) choices.push_back(outcomes);
  }
  std::vector<CaptureHistory> all;
  std::vector<std::size_t> index(choices.size(), 0);
  while (true) {
    CaptureHistory h(choices.size());
    for (std::size_t i = 0; i < choices.size(); ++i) h[i] = choices[i][index[i]];
    all.push_back(std::move(h));
    std::size_t i = 0;
    while (i < index.size() && ++index[i] == choices[i].size()) index[i++] = 0;
    if (i == index.size()) break;
  }
  return all;
}

OracleReport oracle_check(const StudyDesign& design, int instances, std::uint64_t seed) {
  const auto histories = enumerate_histories(design);
  OracleReport report;
  report.instances = instances;
  for (int i = 0; i < instances; ++i) {
    RandomStream rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const ParameterSet params = random_parameters(design, rng, 50.0);
    const LikelihoodModel model(params, design);
    for (const auto& h : histories) {
      const double hmm = std::exp(model.log_history_probability(h));
      const double brute = brute_force_likelihood(h, params, design);
      const double deviation = std::abs(hmm - brute);
      report.max_abs_deviation = std::max(report.max_abs_deviation, deviation);
      if (brute > 0.0) report.max_rel_deviation = std::max(report.max_rel_deviation, deviation / brute);
      ++report.histories;
    }
  }
  return report;
}

}  // namespace msstop::cli
