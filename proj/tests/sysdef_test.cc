#include "homopt/sysdef.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "homopt/errors.h"

namespace homopt {
namespace {

bool CheckPassed(const ValidationReport& r, const std::string& prefix) {
  for (const auto& c : r.checks) {
    if (c.name.rfind(prefix, 0) == 0) return c.pass;
  }
  ADD_FAILURE() << "no check named " << prefix;
  return false;
}

TEST(Validate, Example4Passes) {
  const ExampleFixture fx = BuiltinExample("ex4");
  const ValidationReport r = ValidateSystem(fx.system, fx.lyapunov);
  for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.synthesizable);
}

TEST(Validate, WrongDegreeFails) {
  ExampleFixture fx = BuiltinExample("ex4");
  fx.system.k = 1.0;
  const ValidationReport r = ValidateSystem(fx.system, fx.lyapunov);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(CheckPassed(r, "f homogeneous"));
}

TEST(Validate, OrthogonalityViolation) {
  ExampleFixture fx = BuiltinExample("ex4");
  fx.system.d = Eigen::Vector2d(1.0, 1.0);
  fx.system.theta = std::sqrt(2.0);
  const ValidationReport r = ValidateSystem(fx.system, fx.lyapunov);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(CheckPassed(r, "h^T d"));
  EXPECT_TRUE(CheckPassed(r, "d^T d"));
}

TEST(Validate, ZeroThetaIsFixtureOnly) {
  const ExampleFixture fx = BuiltinExample("ex3");
  const ValidationReport r = ValidateSystem(fx.system, fx.lyapunov);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(r.synthesizable);
  EXPECT_NE(r.note.find("theta>0"), std::string::npos);
}

TEST(Validate, ShapeErrors) {
  EXPECT_THROW(MakeSystem({1.0, 1.0}, 0.0, {"x1"}, {"0", "1"}, {{"0"}, {"1"}}, {"x2"}, {0.0}),
               DomainError);
  EXPECT_THROW(MakeSystem({1.0}, 0.0, {"x2"}, {"1"}, {{"1"}}, {"x1"}, {0.0}), ParseError);
}

TEST(Lie, Example4Values) {
  const ExampleFixture fx = BuiltinExample("ex4");
  const LieDerivatives lie(fx.system, fx.lyapunov);
  const Eigen::Vector2d one(1.0, 1.0);
  EXPECT_NEAR(lie.LG1V(one), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(lie.LG2V(one)[0], std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(lie.LfV(one), 0.0, 1e-15);
  const Eigen::Vector2d zero(0.0, 0.0);
  EXPECT_EQ(lie.LfV(zero), 0.0);
  EXPECT_EQ(lie.LG1V(zero), 0.0);
  EXPECT_EQ(lie.V(zero), 0.0);

  // Published closed forms.
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.5);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d x(n(rng), n(rng));
    const double s = std::pow(std::abs(x[0]), 4.0 / 3.0) + std::pow(x[1], 4);
    const double lfv = 2.0 / 3.0 * std::cbrt(x[0]) / std::sqrt(s) * (-x[0] + std::pow(x[1], 3));
    const double lg = 2.0 * std::pow(x[1], 3) / std::sqrt(s);
    EXPECT_NEAR(lie.LfV(x), lfv, 1e-12 * std::max(1.0, std::abs(lfv)));
    EXPECT_NEAR(lie.LG1V(x), lg, 1e-12 * std::max(1.0, std::abs(lg)));
  }
}

TEST(Lie, FiniteDifferenceDirectional) {
  for (const std::string id : {"ex3", "ex4"}) {
    const ExampleFixture fx = BuiltinExample(id);
    const LieDerivatives lie(fx.system, fx.lyapunov);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      Eigen::Vector2d x(n(rng), n(rng));
      if (x.cwiseAbs().minCoeff() < 0.1) continue;
      const Vec f = fx.system.F(x);
      const double h = 1e-6;
      const double fd = (lie.V(x + h * f) - lie.V(x - h * f)) / (2 * h);
      EXPECT_NEAR(lie.LfV(x), fd, 1e-6 * std::max(1.0, std::abs(fd))) << id;
      const Vec g = fx.system.G1At(x);
      const double fdg = (lie.V(x + h * g) - lie.V(x - h * g)) / (2 * h);
      EXPECT_NEAR(lie.LG1V(x), fdg, 1e-6 * std::max(1.0, std::abs(fdg))) << id;
    }
  }
}

TEST(Lie, DegreeLedger) {
  const ExampleFixture fx = BuiltinExample("ex4");
  const LieDerivatives lie(fx.system, fx.lyapunov);
  const Dilation& d = fx.system.dilation;
  EXPECT_TRUE(CheckHomogeneous([&](const Vec& x) { return lie.LfV(x); }, 2.0, d).pass);
  EXPECT_TRUE(CheckHomogeneous([&](const Vec& x) { return lie.LG1V(x); }, 1.0, d).pass);
}

TEST(Fixtures, AllPresent) {
  const auto all = BuiltinExamples();
  ASSERT_EQ(all.size(), 4u);
  EXPECT_THROW(BuiltinExample("ex5"), DomainError);
  const ExampleFixture ex4 = BuiltinExample("ex4");
  ASSERT_TRUE(ex4.design.has_value());
  EXPECT_EQ(*ex4.design->kappa, 11.0);
  EXPECT_EQ(ex4.design->beta, 2.0);
  EXPECT_EQ(ex4.design->lambda, 2.0);
  // alpha* = 11 * alpha_s with alpha_s(0, 1) = -2 - (2 + sqrt(20))/2.
  EXPECT_NEAR(ex4.controller->Eval(Eigen::Vector2d(0, 1)), 11 * (-2 - (2 + std::sqrt(20.0)) / 2),
              1e-12);
  EXPECT_NEAR(ex4.controller->Eval(Eigen::Vector2d(1, 0)), 0.0, 0.0);
  const ExampleFixture ex3 = BuiltinExample("ex3");
  EXPECT_NEAR(ex3.cost->l.Eval(Eigen::Vector2d(0, 1)), 2 * (std::sqrt(2.0) - 1) - 1, 1e-14);
  const ExampleFixture ex2 = BuiltinExample("ex2");
  EXPECT_DOUBLE_EQ(ex2.controller->Eval(Eigen::VectorXd::Constant(1, 1.0)), -6.5);
}

}  // namespace
}  // namespace homopt
