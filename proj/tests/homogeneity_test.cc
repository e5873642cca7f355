#include "homopt/homogeneity.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "homopt/errors.h"
#include "homopt/expr.h"

namespace homopt {
namespace {

const Dilation kEx4({3.0, 1.0});

TEST(DilationTest, Basics) {
  EXPECT_TRUE(ApplyDilation(kEx4, 2.0, Eigen::Vector2d(1, 1)).isApprox(Eigen::Vector2d(8, 2)));
  EXPECT_TRUE(ApplyDilation(kEx4, 0.5, Eigen::Vector2d(8, 2)).isApprox(Eigen::Vector2d(1, 1)));
  EXPECT_EQ(ApplyDilation(kEx4, 1.0, Eigen::Vector2d(3, -7)), Eigen::Vector2d(3, -7));
  EXPECT_DOUBLE_EQ(kEx4.min_weight(), 1.0);
  EXPECT_THROW(ApplyDilation(kEx4, 0.0, Eigen::Vector2d(1, 1)), DomainError);
  EXPECT_THROW(ApplyDilation(kEx4, 1.0, Eigen::Vector3d(1, 1, 1)), DomainError);
  EXPECT_THROW(Dilation({1.0, -1.0}), DomainError);
  EXPECT_THROW(Dilation(std::vector<double>{}), DomainError);
}

TEST(DilationTest, RoundTrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  for (double eps : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3}) {
    for (int i = 0; i < 20; ++i) {
      Vec x(2);
      x << n(rng), n(rng);
      const Vec back = kEx4.Apply(eps, kEx4.Apply(1.0 / eps, x));
      EXPECT_LE((back - x).norm(), 1e-12 * x.norm());
    }
  }
}

TEST(NormTest, Values) {
  const HomogeneousNorm g(kEx4, 4.0);
  EXPECT_NEAR(g(Eigen::Vector2d(1, 1)), std::pow(2.0, 0.25), 1e-15);
  EXPECT_EQ(g(Eigen::Vector2d(0, 0)), 0.0);
  EXPECT_NEAR(g(kEx4.Apply(3.0, Eigen::Vector2d(1, 1))), 3.0 * std::pow(2.0, 0.25), 1e-13);
  EXPECT_THROW(HomogeneousNorm(kEx4, 3.0), DomainError);
}

TEST(NormTest, DegreeOneProperty) {
  const HomogeneousNorm g(Dilation({3.0, 1.0, 2.0}), 7.0);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> le(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    Vec x(3);
    x << n(rng), n(rng), n(rng);
    const double eps = std::pow(10.0, le(rng));
    EXPECT_NEAR(g(g.dilation().Apply(eps, x)), eps * g(x), 1e-10 * eps * g(x));
    EXPECT_GT(g(x), 0.0);
  }
}

TEST(SphereTest, Projection) {
  const HomogeneousNorm g(kEx4, 4.0);
  const SpherePoint p = ProjectToSphere(g, Eigen::Vector2d(1, 1));
  EXPECT_NEAR(p.coords[0], std::pow(2.0, -0.75), 1e-15);
  EXPECT_NEAR(p.coords[1], std::pow(2.0, -0.25), 1e-15);
  EXPECT_LE(p.residual, 1e-12);
  const SpherePoint q = ProjectToSphere(g, Eigen::Vector2d(0, 5));
  EXPECT_NEAR(q.coords[0], 0.0, 0.0);
  EXPECT_NEAR(q.coords[1], 1.0, 1e-15);
  const SpherePoint same = ProjectToSphere(g, q.coords);
  EXPECT_TRUE(same.coords.isApprox(q.coords, 1e-15));
  EXPECT_THROW(ProjectToSphere(g, Eigen::Vector2d(0, 0)), DomainError);
}

TEST(SphereTest, Sampling) {
  const HomogeneousNorm g(kEx4, 4.0);
  const auto a = SphereSample(g, 1000, 7);
  const auto b = SphereSample(g, 1000, 7);
  ASSERT_EQ(a.size(), 1000u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].coords, b[i].coords);
    EXPECT_LE(std::abs(g(a[i].coords) - 1.0), 1e-12);
  }
  EXPECT_EQ(a[0].coords, Eigen::Vector2d(1, 0));
  EXPECT_EQ(a[3].coords, Eigen::Vector2d(0, -1));

  const HomogeneousNorm g1(Dilation({2.0}), 3.0);
  const auto pts = SphereSample(g1, 100, 1);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_DOUBLE_EQ(pts[0].coords[0], 1.0);
  EXPECT_DOUBLE_EQ(pts[1].coords[0], -1.0);
}

TEST(CheckHomogeneousTest, Examples) {
  const Expr m = Parse("x2^3");
  auto eval = [](const Expr& e) { return [e](const Vec& x) { return e.Eval(x); }; };
  EXPECT_TRUE(CheckHomogeneous(eval(m), 3.0, kEx4).pass);
  const Expr s = Parse("x1 + x2");
  for (double deg : {1.0, 2.0, 3.0}) EXPECT_FALSE(CheckHomogeneous(eval(s), deg, kEx4).pass);
  const Expr v = Parse("pow(apow(x1,4/3)+pow(x2,4), 1/2)");
  const HomogeneityReport r = CheckHomogeneous(eval(v), 2.0, kEx4);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_rel_error, 1e-12);
  EXPECT_FALSE(CheckHomogeneous(eval(v), 2.5, kEx4).pass);

  auto field = [](const Vec& x) {
    Vec out(2);
    out << -x[0] + std::pow(x[1], 3), 0.0;
    return out;
  };
  EXPECT_TRUE(CheckHomogeneousField(field, 0.0, kEx4).pass);
  EXPECT_FALSE(CheckHomogeneousField(field, 1.0, kEx4).pass);

  const Expr bad = Parse("1/(x1 - x1)");
  EXPECT_THROW(CheckHomogeneous(eval(bad), 0.0, kEx4), EvalError);
}

TEST(SphereOptimizeTest, ConstantObjective) {
  const HomogeneousNorm g(kEx4, 4.0);
  auto obj = [&](const Vec& x) { return g(x) * g(x); };
  SphereBudget budget;
  budget.samples = 512;
  EXPECT_NEAR(SphereOptimize(obj, g, OptimizeMode::kMin, budget, 1).value, 1.0, 1e-12);
  EXPECT_NEAR(SphereOptimize(obj, g, OptimizeMode::kMax, budget, 1).value, 1.0, 1e-12);
}

TEST(SphereOptimizeTest, LinearFunctionalOnEuclideanSphere) {
  const HomogeneousNorm g(Dilation({1.0, 1.0, 1.0}), 2.0);
  Vec c(3);
  c << 1.0, -2.0, 0.5;
  SphereBudget budget;
  budget.samples = 2048;
  const SphereOptimum best =
      SphereOptimize([&](const Vec& x) { return c.dot(x); }, g, OptimizeMode::kMax, budget, 3);
  EXPECT_NEAR(best.value, c.norm(), 1e-8);
  EXPECT_TRUE(best.argpoint.isApprox(c / c.norm(), 1e-4));
  EXPECT_GT(best.n_evals, 2048);
}

TEST(SphereOptimizeTest, ConstraintRespectedAndRefinementMonotone) {
  const HomogeneousNorm g(kEx4, 4.0);
  auto q0 = [](const Vec& x) { return std::abs(x[0]) >= 4.0 * std::pow(std::abs(x[1]), 3); };
  auto obj = [](const Vec& x) { return x[1] - 0.3 * x[0]; };
  SphereBudget coarse;
  coarse.samples = 256;
  coarse.refine_iters = 0;
  SphereBudget refined = coarse;
  refined.refine_iters = 200;
  const SphereOptimum a = SphereOptimize(obj, g, OptimizeMode::kMax, coarse, 4, q0);
  const SphereOptimum b = SphereOptimize(obj, g, OptimizeMode::kMax, refined, 4, q0);
  EXPECT_TRUE(q0(a.argpoint));
  EXPECT_TRUE(q0(b.argpoint));
  EXPECT_GE(b.value, a.value);
  EXPECT_THROW(SphereOptimize(obj, g, OptimizeMode::kMax, coarse, 4,
                              [](const Vec&) { return false; }),
               DomainError);
}

TEST(SphereOptimizeTest, OneDimensional) {
  const HomogeneousNorm g(Dilation({1.0}), 2.0);
  auto obj = [](const Vec& x) { return 3.0 * x[0] + 1.0; };
  SphereBudget budget;
  EXPECT_DOUBLE_EQ(SphereOptimize(obj, g, OptimizeMode::kMin, budget, 0).value, -2.0);
  EXPECT_DOUBLE_EQ(SphereOptimize(obj, g, OptimizeMode::kMax, budget, 0).value, 4.0);
}

}  // namespace
}  // namespace homopt
