#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "msstop/errors.hpp"
#include "msstop/hmm.hpp"
#include "msstop/scenario.hpp"
#include "msstop/simulate.hpp"
#include "test_support.hpp"

namespace msstop {
namespace {

TEST(Simulate, SameSeedSameData) {
  const auto scenario = paper_scenario(100);
  const auto a = simulate(scenario.params, scenario.design, 42);
  const auto b = simulate(scenario.params, scenario.design, 42);
  const auto c = simulate(scenario.params, scenario.design, 43);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.truth.abundance, b.truth.abundance);
  EXPECT_FALSE(a.data == c.data);
}

TEST(Simulate, RejectsNonIntegralN) {
  auto scenario = paper_scenario(100);
  scenario.params.N = 100.5;
  EXPECT_THROW(simulate(scenario.params, scenario.design, 1), InputError);
}

TEST(Simulate, TruthIsConsistentWithData) {
  const auto scenario = paper_scenario(100);
  const auto sim = simulate(scenario.params, scenario.design, 5);
  ASSERT_EQ(sim.truth.individuals.size(), 100u);
  long captured = 0;
  std::vector<long> attending(3, 0);
  for (const auto& ind : sim.truth.individuals) {
    captured += ind.captured ? 1 : 0;
    for (int t = ind.recruited; t <= ind.last_period; ++t) {
      ++attending[static_cast<std::size_t>(t)];
      const auto ti = static_cast<std::size_t>(t);
      EXPECT_LE(ind.arrival[ti], ind.departure[ti]);
      EXPECT_EQ(static_cast<int>(ind.states[ti].size()), ind.departure[ti] - ind.arrival[ti] + 1);
    }
  }
  EXPECT_EQ(captured, sim.data.observed());
  EXPECT_EQ(attending, sim.truth.abundance);
}

TEST(Simulate, HistoryFrequenciesMatchModelProbabilities) {
  std::mt19937_64 rng(101);
  const StudyDesign design({2, 2}, 2);
  ParameterSet p = testing::random_parameters(design, rng, 200000.0);
  const auto sim = simulate(p, design, 9);
  std::map<CaptureHistory, long> observed;
  for (std::size_t j = 0; j < sim.data.unique_count(); ++j) observed[sim.data.histories()[j]] = sim.data.counts()[j];

  double chi2 = 0.0;
  int cells = 0;
  for (const auto& h : testing::all_histories(design)) {
    const double expected = p.N * primary_likelihood(h, p, design);
    const bool zero = std::all_of(h.begin(), h.end(), [](std::uint8_t x) { return x == 0; });
    const double count = zero ? p.N - static_cast<double>(sim.data.observed()) : static_cast<double>(observed[h]);
    chi2 += (count - expected) * (count - expected) / expected;
    ++cells;
  }
  // 80 degrees of freedom; the bound is about five standard deviations above the mean.
  EXPECT_EQ(cells, 81);
  EXPECT_LT(chi2, 145.0);
}

TEST(Simulate, MeanAbundanceMatchesDerivedAbundance) {
  const auto scenario = paper_scenario(100);
  std::vector<double> mean(3, 0.0);
  const int reps = 1000;
  for (int i = 0; i < reps; ++i) {
    const auto sim = simulate(scenario.params, scenario.design, static_cast<std::uint64_t>(i));
    EXPECT_GT(sim.data.observed(), 0);
    EXPECT_LE(sim.data.observed(), 100);
    for (std::size_t t = 0; t < 3; ++t) mean[t] += static_cast<double>(sim.truth.abundance[t]) / reps;
  }
  EXPECT_NEAR(mean[0], 40.0, 1.5);
  EXPECT_NEAR(mean[1], 48.0, 1.5);
  EXPECT_NEAR(mean[2], 73.6, 1.5);
}

TEST(Simulate, CertainAttendanceAndCapture) {
  const StudyDesign design({3, 2}, 1);
  ParameterSet p = zero_parameters(design);
  p.N = 25;
  p.r = Eigen::Vector2d(1.0, 0.0);
  p.s.setConstant(1.0);
  for (int t = 0; t < 2; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    p.beta[ti].setZero();
    p.beta[ti][0] = 1.0;
    p.phi[ti].setConstant(1.0);
    p.alpha[ti][0] = 1.0;
    p.psi[ti](0, 0) = 1.0;
    for (auto& m : p.p[ti]) m.setConstant(1.0);
  }
  const auto sim = simulate(p, design, 1);
  ASSERT_EQ(sim.data.unique_count(), 1u);
  EXPECT_EQ(sim.data.observed(), 25);
  EXPECT_EQ(sim.data.histories()[0], CaptureHistory(5, 1));

  for (auto& period : p.p) {
    for (auto& m : period) m.setZero();
  }
  const auto blind = simulate(p, design, 1);
  EXPECT_EQ(blind.data.observed(), 0);
  EXPECT_EQ(blind.data.unique_count(), 0u);
}

TEST(Simulate, RecruitmentFrequenciesMatchR) {
  const auto scenario = paper_scenario(100000);
  const auto sim = simulate(scenario.params, scenario.design, 77);
  std::vector<double> freq(3, 0.0);
  for (const auto& ind : sim.truth.individuals) freq[static_cast<std::size_t>(ind.recruited)] += 1.0;
  for (int t = 0; t < 3; ++t) {
    const double r = scenario.params.r[t];
    const double se = std::sqrt(r * (1.0 - r) / 1e5);
    EXPECT_NEAR(freq[static_cast<std::size_t>(t)] / 1e5, r, 3.0 * se);
  }
}

TEST(Simulate, StateTransitionFrequenciesMatchPsi) {
  const auto scenario = paper_scenario(20000);
  const auto sim = simulate(scenario.params, scenario.design, 78);
  Eigen::Matrix2d counts = Eigen::Matrix2d::Zero();
  for (const auto& ind : sim.truth.individuals) {
    for (const auto& states : ind.states) {
      for (std::size_t i = 1; i < states.size(); ++i) counts(states[i - 1] - 1, states[i] - 1) += 1.0;
    }
  }
  for (int i = 0; i < 2; ++i) {
    const double total = counts.row(i).sum();
    const double psi = scenario.params.psi[0](i, 0);
    EXPECT_NEAR(counts(i, 0) / total, psi, 3.0 * std::sqrt(psi * (1.0 - psi) / total));
  }
}

TEST(Scenario, StandardValues) {
  const auto s100 = paper_scenario(100);
  EXPECT_EQ(s100.params.psi[0](0, 1), 0.6);
  EXPECT_EQ(s100.params.alpha[0], Eigen::Vector2d(0.35, 0.65));
  const auto s1000 = paper_scenario(1000);
  EXPECT_TRUE((s1000.params.s.array() == 0.7).all());
  EXPECT_EQ(s1000.design.occasions(), (std::vector<int>{5, 5, 5}));
}

TEST(Simulate, RespectsAvailability) {
  const StudyDesign design = newt_design();
  std::mt19937_64 rng(7);
  ParameterSet p = testing::random_parameters(design, rng, 300.0);
  const auto sim = simulate(p, design, 3);
  for (std::size_t j = 0; j < sim.data.unique_count(); ++j) {
    for (int t = 0; t < 8; ++t) {
      for (auto x : sim.data.slice(j, t)) EXPECT_NE(x, 2);
    }
  }
}

TEST(MakeDataset, MergesSortsAndDropsZeroHistories) {
  const StudyDesign design({2}, 1);
  const auto data = make_dataset(design, {{1, 0}, {0, 0}, {0, 1}, {1, 0}});
  ASSERT_EQ(data.unique_count(), 2u);
  EXPECT_EQ(data.histories()[0], (CaptureHistory{0, 1}));
  EXPECT_EQ(data.counts()[1], 2);
  EXPECT_EQ(data.observed(), 3);
}

}  // namespace
}  // namespace msstop
