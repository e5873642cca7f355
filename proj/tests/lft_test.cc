#include "homopt/lft.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "homopt/errors.h"

namespace homopt {
namespace {

TEST(LfTransform, Quadratic) {
  const PowerKInfinity l = LfTransform(PowerKInfinity(1.0, 2.0));
  EXPECT_NEAR(l.a(), 0.25, 1e-15);
  EXPECT_NEAR(l.p(), 2.0, 1e-15);
  const PowerKInfinity l2 = LfTransform(PowerKInfinity(2.0, 2.0));
  for (double s : {0.1, 1.0, 3.0}) EXPECT_NEAR(l2(2.0 * s), 0.5 * s * s, 1e-14);
}

TEST(LfTransform, MatchesDefinition) {
  for (auto [a, p] : std::vector<std::pair<double, double>>{{1, 2}, {3, 2}, {0.5, 3}, {2, 1.5}}) {
    const PowerKInfinity g(a, p);
    const PowerKInfinity l = LfTransform(g);
    for (double s : {0.2, 1.0, 5.0}) {
      const double inv = g.InverseDerivative(s);
      EXPECT_NEAR(l(s), s * inv - g(inv), 1e-12 * std::max(1.0, l(s)));
    }
    EXPECT_NEAR((p - 1.0) * (l.p() - 1.0), 1.0, 1e-12);
  }
}

TEST(LfTransform, Involution) {
  for (auto [a, p] : std::vector<std::pair<double, double>>{{3, 2}, {0.5, 3}, {2, 1.5}, {7, 4}}) {
    const PowerKInfinity back = LfTransform(LfTransform(PowerKInfinity(a, p)));
    EXPECT_NEAR(back.a(), a, 1e-12 * a);
    EXPECT_NEAR(back.p(), p, 1e-12 * p);
  }
  EXPECT_THROW(PowerKInfinity(1.0, 1.0), DomainError);
  EXPECT_THROW(PowerKInfinity(-1.0, 2.0), DomainError);
}

TEST(Scaling, QuadraticOnly) {
  EXPECT_TRUE(CheckScaling(PowerKInfinity(1.0 / 0.7, 2.0)));
  EXPECT_TRUE(CheckScaling(PowerKInfinity(5.0, 2.0)));
  EXPECT_FALSE(CheckScaling(PowerKInfinity(1.0, 3.0)));
}

TEST(Young, GapNonnegativeAndTight) {
  const PowerKInfinity g(2.0, 2.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  double min_gap = 1e300;
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd a(3), b(3);
    for (int j = 0; j < 3; ++j) {
      a[j] = n(rng);
      b[j] = n(rng);
    }
    min_gap = std::min(min_gap, YoungGap(g, a, b));
    const Eigen::VectorXd star = YoungArgmax(g, b);
    EXPECT_LE(std::abs(YoungGap(g, star, b)), 1e-10 * std::max(1.0, b.squaredNorm()));
    Eigen::VectorXd delta(3);
    for (int j = 0; j < 3; ++j) delta[j] = n(rng);
    delta *= 1e-3 / delta.norm();
    EXPECT_GT(YoungGap(g, star + delta, b), 0.0);
  }
  EXPECT_GE(min_gap, 0.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  EXPECT_GE(YoungGap(g, zero, Eigen::Vector2d(1, 2)), 0.0);
}

TEST(Young, ArgmaxExamples) {
  const PowerKInfinity g(1.0, 2.0);
  EXPECT_TRUE(YoungArgmax(g, Eigen::Vector2d(2, 0)).isApprox(Eigen::Vector2d(1, 0)));
  EXPECT_EQ(YoungArgmax(g, Eigen::Vector2d(0, 0)), Eigen::Vector2d(0, 0));
  const PowerKInfinity g3(0.7, 3.0);
  const Eigen::Vector2d b(1.5, -0.8);
  double best = -1e300, best_r = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double r = 10.0 * i / 100000.0;
    const double val = r * b.norm() - g3(r);
    if (val > best) {
      best = val;
      best_r = r;
    }
  }
  const Eigen::VectorXd a = YoungArgmax(g3, b);
  EXPECT_NEAR(a.norm(), best_r, 1e-4);
  EXPECT_NEAR(a.normalized().dot(b.normalized()), 1.0, 1e-12);
}

}  // namespace
}  // namespace homopt
