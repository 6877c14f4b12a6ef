#include "msstop/scenario.hpp"

#include <array>
#include <cmath>

#include "msstop/layout.hpp"
#include "msstop/structure.hpp"
#include "msstop/transforms.hpp"

namespace msstop {

namespace {

constexpr std::array<double, 3> kRecruitment{0.4, 0.2, 0.4};
constexpr double kSurvival = 0.7;
constexpr std::array<double, 3> kArrivalGradient{-1.0, 0.0, -2.0};
constexpr double kArrivalIntercept = 1.0;
constexpr std::array<double, 4> kRetentionOccasion{2.5, 1.8, 2.1, 1.4};
constexpr double kRetentionAge = -1.0;
constexpr std::array<double, 2> kInitialState{0.35, 0.65};
constexpr std::array<double, 2> kCapture{0.6, 0.8};

}  // namespace

Scenario paper_scenario(double N) {
  StudyDesign design({5, 5, 5}, 2);
  ParameterSet p = zero_parameters(design);
  p.N = N;
  p.r = Eigen::Vector3d(kRecruitment[0], kRecruitment[1], kRecruitment[2]);
  p.s.setConstant(kSurvival);
  Eigen::Matrix2d psi;
  psi << 0.4, 0.6, 0.3, 0.7;
  const Eigen::VectorXd tau = Eigen::Vector4d(kRetentionOccasion[0], kRetentionOccasion[1], kRetentionOccasion[2],
                                              kRetentionOccasion[3]);
  for (int t = 0; t < 3; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    p.beta[ti] = arrival_from_logistic(kArrivalGradient[ti], kArrivalIntercept, 5);
    p.phi[ti] = retention_from_logistic(tau, kRetentionAge, 5);
    p.alpha[ti] = Eigen::Vector2d(kInitialState[0], kInitialState[1]);
    p.psi[ti] = psi;
    for (auto& pk : p.p[ti]) {
      pk.row(0).setConstant(kCapture[0]);
      pk.row(1).setConstant(kCapture[1]);
    }
  }
  return {std::move(p), std::move(design), N == 100.0 || N == 1000.0};
}

std::vector<double> paper_scenario_theta(double N, long observed) {
  const auto scenario = paper_scenario(N);
  const StructureLayout layout(generating_structure(), scenario.design);
  return layout.to_unconstrained(scenario.params, observed);
}

StudyDesign newt_design() {
  std::vector<int> occasions(12, 21);
  occasions.back() = 22;
  std::vector<std::vector<bool>> availability(12, {true, false});
  for (int t = 8; t < 12; ++t) availability[static_cast<std::size_t>(t)] = {true, true};
  return StudyDesign(occasions, 2, std::move(availability), 12, occasions);
}

}  // namespace msstop
