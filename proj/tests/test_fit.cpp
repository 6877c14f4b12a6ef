#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "msstop/fit.hpp"
#include "msstop/hmm.hpp"
#include "msstop/scenario.hpp"
#include "msstop/simulate.hpp"

namespace msstop {
namespace {

FitOptions quick_options() {
  FitOptions options;
  options.starts = 2;
  options.threads = 1;
  return options;
}

TEST(Fit, ScenarioFitConvergesNearTruth) {
  const auto scenario = paper_scenario(1000);
  const auto sim = simulate(scenario.params, scenario.design, 21);
  const auto result = fit(sim.data, generating_structure(), quick_options());
  ASSERT_TRUE(result.converged) << result.optimizer.message;
  EXPECT_EQ(result.n_params, 18);
  EXPECT_NEAR(result.params_hat.N, 1000.0, 60.0);
  EXPECT_NEAR(result.params_hat.s(0, 0), 0.7, 0.06);
  // The optimum is at least as good as the generating point.
  EXPECT_GE(result.loglik, log_likelihood(sim.data, scenario.params) - 1e-6);
  EXPECT_TRUE(result.boundary.empty());
}

TEST(Fit, AicIdentity) {
  const auto scenario = paper_scenario(100);
  const auto sim = simulate(scenario.params, scenario.design, 3);
  const auto result = fit(sim.data, constant_structure(), quick_options());
  EXPECT_DOUBLE_EQ(result.aic, -2.0 * result.loglik + 2.0 * result.n_params);
  EXPECT_DOUBLE_EQ(aic(-10.0, 3), 26.0);
  EXPECT_NEAR(result.loglik, log_likelihood(sim.data, result.params_hat), 1e-9);
}

TEST(Fit, ThreadCountDoesNotChangeResult) {
  const auto scenario = paper_scenario(100);
  const auto sim = simulate(scenario.params, scenario.design, 5);
  FitOptions one = quick_options();
  one.starts = 4;
  FitOptions four = one;
  four.threads = 4;
  const auto a = fit(sim.data, generating_structure(), one);
  const auto b = fit(sim.data, generating_structure(), four);
  EXPECT_EQ(a.theta_hat, b.theta_hat);
  EXPECT_EQ(a.loglik, b.loglik);
}

TEST(Fit, CompleteCensusFlagsBoundary) {
  const StudyDesign design({3}, 1);
  const Dataset data(design, {{1, 1, 1}}, {40});
  const auto structure = parse_structure("beta: year\nphi: const\np: const");
  const auto result = fit(data, structure, quick_options());
  EXPECT_GT(result.params_hat.p[0][0](0, 0), 0.99);
  EXPECT_LT(result.params_hat.N - 40.0, 0.5);
  EXPECT_FALSE(result.boundary.empty());
}

TEST(Fit, DerivedAbundanceFromFit) {
  const auto scenario = paper_scenario(100);
  const auto sim = simulate(scenario.params, scenario.design, 6);
  const auto result = fit(sim.data, generating_structure(), quick_options());
  const Eigen::VectorXd a = derived_abundance(result);
  const Eigen::VectorXd b = derived_abundance(result.params_hat, scenario.design);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fit, SuppliedStartIsUsed) {
  const auto scenario = paper_scenario(100);
  const auto sim = simulate(scenario.params, scenario.design, 8);
  FitOptions options = quick_options();
  options.starts = 1;
  const auto result = fit(sim.data, generating_structure(), options,
                          paper_scenario_theta(100, sim.data.observed()));
  EXPECT_TRUE(result.converged);
  EXPECT_THROW(fit(sim.data, generating_structure(), options, std::vector<double>(2, 0.0)), std::invalid_argument);
}

TEST(ParallelFor, RunsEveryTaskOnce) {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(DerivedAbundance, Examples) {
  const StudyDesign one({3}, 1);
  ParameterSet p = zero_parameters(one);
  p.N = 57.5;
  p.r[0] = 1.0;
  EXPECT_DOUBLE_EQ(derived_abundance(p, one)[0], 57.5);

  const StudyDesign two({2, 2}, 1);
  ParameterSet q = zero_parameters(two);
  q.N = 80;
  q.r = Eigen::Vector2d(1.0, 0.0);
  q.s.setConstant(1.0);
  EXPECT_DOUBLE_EQ(derived_abundance(q, two)[1], 80.0);
}

TEST(DerivedAbundance, BoundedByNAndConsistentInFirstPeriod) {
  const auto scenario = paper_scenario(100);
  const auto sim = simulate(scenario.params, scenario.design, 10);
  const auto result = fit(sim.data, generating_structure(), quick_options());
  const Eigen::VectorXd n = derived_abundance(result);
  EXPECT_LE(n.maxCoeff(), result.params_hat.N + 1e-9);
  EXPECT_NEAR(n[0], result.params_hat.N * result.params_hat.r[0], 1e-9);
}

TEST(Fit, NestedModelsHaveMonotoneLikelihood) {
  const auto scenario = paper_scenario(100);
  const auto sim = simulate(scenario.params, scenario.design, 12);
  const auto small = fit(sim.data, constant_structure(), quick_options());
  const auto medium = fit(sim.data, with_family(constant_structure(), Family::capture, "state"), quick_options());
  const auto large = fit(sim.data, with_family(with_family(constant_structure(), Family::capture, "state"),
                                               Family::recruitment, "year"),
                         quick_options());
  ASSERT_TRUE(small.converged && medium.converged && large.converged);
  EXPECT_GE(medium.loglik, small.loglik - 1e-4);
  EXPECT_GE(large.loglik, medium.loglik - 1e-4);
}

TEST(Fit, InvariantToHistoryOrder) {
  const auto scenario = paper_scenario(100);
  const auto data = simulate(scenario.params, scenario.design, 14).data;
  auto histories = data.histories();
  auto counts = data.counts();
  std::reverse(histories.begin(), histories.end());
  std::reverse(counts.begin(), counts.end());
  const Dataset reversed(data.design(), histories, counts);
  const auto a = fit(data, generating_structure(), quick_options());
  const auto b = fit(reversed, generating_structure(), quick_options());
  EXPECT_NEAR(a.loglik, b.loglik, 1e-6);
  EXPECT_NEAR(a.params_hat.N, b.params_hat.N, 1e-2);
}

}  // namespace
}  // namespace msstop
