#include <gtest/gtest.h>

#include <array>
#include <random>

#include "msstop/errors.hpp"
#include "msstop/transforms.hpp"
#include "test_support.hpp"

namespace msstop {
namespace {

TEST(Transforms, InverseLogitValues) {
  EXPECT_NEAR(inv_logit(2.5), 0.9241418199787564, 2e-16);
  EXPECT_NEAR(inv_logit(-1.6), 0.16798161486607552, 2e-16);
  EXPECT_DOUBLE_EQ(inv_logit(0.0), 0.5);
  EXPECT_GT(inv_logit(-800.0), -1.0);
  EXPECT_EQ(inv_logit(800.0), 1.0);
  EXPECT_NEAR(logit(inv_logit(3.7)), 3.7, 1e-12);
}

TEST(Transforms, LogisticArrivalMatchesFrozenValues) {
  // Independent 30-digit evaluation of normalized inverse-logit weights.
  const std::array<double, 5> expected{0.5243528186565484, 0.2820403846977108, 0.12500877630878815,
                                       0.04973578055581027, 0.018862239781142397};
  const Eigen::VectorXd beta = arrival_from_logistic(-1.0, 1.0, 5);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(beta[k], expected[static_cast<std::size_t>(k)], 1e-15);
  EXPECT_NEAR(beta.sum(), 1.0, 1e-15);
}

TEST(Transforms, ZeroGradientGivesUniformArrival) {
  const Eigen::VectorXd beta = arrival_from_logistic(0.0, 0.3, 4);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(beta[k], 0.25, 1e-15);
}

TEST(Transforms, ConditionalAndStickBreakingAreInverse) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd x = testing::random_simplex(rng, 6);
    const Eigen::VectorXd back = stick_breaking(conditional_arrival(x));
    EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Transforms, ConditionalRecruitmentExample) {
  const Eigen::VectorXd c = conditional_recruitment(Eigen::Vector3d(0.4, 0.2, 0.4));
  EXPECT_NEAR(c[0], 0.4, 1e-15);
  EXPECT_NEAR(c[1], 0.2 / 0.6, 1e-15);
  EXPECT_NEAR(c[2], 1.0, 1e-15);
}

TEST(Transforms, ConditionalWithZeroTail) {
  const Eigen::VectorXd c = conditional_arrival(Eigen::Vector4d(0.5, 0.5, 0.0, 0.0));
  EXPECT_DOUBLE_EQ(c[0], 0.5);
  EXPECT_DOUBLE_EQ(c[1], 1.0);
  EXPECT_DOUBLE_EQ(c[2], 0.0);
  EXPECT_DOUBLE_EQ(c[3], 0.0);
}

TEST(Transforms, SimplexLogitsRoundTrip) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd x = testing::random_simplex(rng, 4);
    const Eigen::VectorXd w = logits_from_simplex(x);
    ASSERT_EQ(w.size(), 3);
    const Eigen::VectorXd back = simplex_from_logits({w.data(), 3});
    EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-14);
  }
  const Eigen::VectorXd extreme = simplex_from_logits(std::vector<double>{800.0, -800.0});
  EXPECT_TRUE(extreme.allFinite());
  EXPECT_NEAR(extreme.sum(), 1.0, 1e-15);
}

TEST(Transforms, RetentionFromLogistic) {
  const Eigen::MatrixXd phi = retention_from_logistic(Eigen::Vector2d(2.5, 1.8), -1.0, 3);
  ASSERT_EQ(phi.rows(), 2);
  ASSERT_EQ(phi.cols(), 3);
  EXPECT_NEAR(phi(0, 0), inv_logit(2.5), 1e-15);
  EXPECT_NEAR(phi(1, 2), inv_logit(-0.2), 1e-15);
}

TEST(Transforms, RequireSimplex) {
  EXPECT_NO_THROW(require_simplex(Eigen::Vector2d(0.3, 0.7), 1e-12, "x"));
  EXPECT_THROW(require_simplex(Eigen::Vector2d(0.3, 0.8), 1e-12, "x"), ConstraintError);
  EXPECT_THROW(require_simplex(Eigen::Vector2d(-0.1, 1.1), 1e-12, "x"), ConstraintError);
}

TEST(Transforms, ConditionalRecruitmentEdgeExamples) {
  const Eigen::VectorXd a = conditional_recruitment(Eigen::Vector2d(1.0, 0.0));
  EXPECT_DOUBLE_EQ(a[0], 1.0);
  EXPECT_DOUBLE_EQ(a[1], 0.0);
  const Eigen::VectorXd b = conditional_recruitment(Eigen::Vector4d(0.25, 0.25, 0.25, 0.25));
  EXPECT_NEAR(b[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(b[2], 0.5, 1e-15);
  EXPECT_NEAR(b[3], 1.0, 1e-15);
}

TEST(Transforms, ConditionalArrivalExamples) {
  const Eigen::VectorXd a = conditional_arrival(Eigen::Vector2d(0.5, 0.5));
  EXPECT_DOUBLE_EQ(a[1], 1.0);
  const Eigen::VectorXd b = conditional_arrival(Eigen::Vector3d(0.2, 0.3, 0.5));
  EXPECT_NEAR(b[0], 0.2, 1e-15);
  EXPECT_NEAR(b[1], 0.375, 1e-15);
  EXPECT_NEAR(b[2], 1.0, 1e-15);
  const Eigen::VectorXd c = conditional_arrival(Eigen::Vector3d(1.0, 0.0, 0.0));
  EXPECT_EQ(c, Eigen::Vector3d(1.0, 0.0, 0.0));
}

TEST(Transforms, SymmetricLogitsGiveUniformSimplex) {
  const Eigen::VectorXd x = simplex_from_logits(std::vector<double>{0.0, 0.0});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(x[i], 1.0 / 3.0, 1e-15);
}

TEST(Transforms, LogisticArrivalAlwaysNormalized) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 20.0);
  std::uniform_int_distribution<int> k(1, 300);
  for (int rep = 0; rep < 1000; ++rep) {
    const Eigen::VectorXd beta = arrival_from_logistic(z(rng), z(rng), k(rng));
    ASSERT_TRUE(beta.allFinite());
    EXPECT_NEAR(beta.sum(), 1.0, 1e-12);
    EXPECT_GE(beta.minCoeff(), 0.0);
  }
  const Eigen::VectorXd flat = arrival_from_logistic(0.0, 1.0, 5);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(flat[i], 0.2, 1e-15);
}

TEST(Transforms, RetentionExamples) {
  const Eigen::MatrixXd scenario = retention_from_logistic(Eigen::Vector4d(2.5, 1.8, 2.1, 1.4), -1.0, 5);
  EXPECT_NEAR(scenario(0, 0), 0.9241418199787564, 2e-16);
  EXPECT_NEAR(scenario(3, 3), 0.16798161486607552, 2e-16);
  const Eigen::MatrixXd zero = retention_from_logistic(Eigen::Vector3d::Zero(), 0.0, 4);
  EXPECT_TRUE((zero.array() == 0.5).all());
}

}  // namespace
}  // namespace msstop
