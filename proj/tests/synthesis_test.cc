#include "homopt/synthesis.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "homopt/errors.h"

namespace homopt {
namespace {

const SynthesizedController& Ex4() {
  static const SynthesizedController s = [] {
    const ExampleFixture fx = BuiltinExample("ex4");
    return Synthesize(fx.system, fx.lyapunov, ConfigFromFixture(fx));
  }();
  return s;
}

std::vector<Vec> RandomPoints(int n, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Vec> pts;
  while (static_cast<int>(pts.size()) < count) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = u(rng);
    pts.push_back(x);
  }
  return pts;
}

double Rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

TEST(Synthesize, Example4Bundle) {
  const auto& s = Ex4();
  EXPECT_DOUBLE_EQ(s.kappa, 11.0);
  EXPECT_GT(s.kappa_selected, 11.0);
  EXPECT_NEAR(s.constants.c8, 2.0, 1e-6);
  EXPECT_NEAR(s.constants.c7, 0.5, 1e-6);
  EXPECT_NEAR(s.gamma.a(), 2.0, 1e-6);
  EXPECT_NEAR(s.gamma0.a(), 2.0, 1e-6);
  EXPECT_DOUBLE_EQ(s.gamma0.p(), 2.0);
  EXPECT_NEAR(s.constants.rho, 2.18, 0.05);
  EXPECT_GT(s.min_aux_decrease, 0.0);

  const Vec e1 = Eigen::Vector2d(1.0, 0.0);
  EXPECT_NEAR(s.lftv(e1), -2.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.H_kappa(e1), 22.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.H_kappa(Vec::Zero(2)), 0.0);
  EXPECT_DOUBLE_EQ(s.l(Vec::Zero(2)), 0.0);
  const Vec e2 = Eigen::Vector2d(0.0, 1.0);
  EXPECT_NEAR(s.alpha_s(e2), -(3.0 + std::sqrt(5.0)), 1e-9);
  EXPECT_NEAR(s.R(e2), (3.0 - std::sqrt(5.0)) / 2.0, 1e-9);
}

TEST(Synthesize, MatchesPublishedClosedForms) {
  const auto& s = Ex4();
  const ExampleFixture fx = BuiltinExample("ex4");
  for (const Vec& x : RandomPoints(2, 100, 7)) {
    EXPECT_LT(Rel(s.alpha_star(x), fx.controller->Eval(x)), 1e-9) << FormatPoint(x);
    EXPECT_LT(Rel(s.l(x), fx.cost->l.Eval(x)), 1e-9) << FormatPoint(x);
    EXPECT_LT(Rel(s.R1(x), fx.cost->R1.Eval(x)), 1e-9) << FormatPoint(x);
    EXPECT_LT(Rel(s.E(x), fx.cost->E.Eval(x)), 1e-9) << FormatPoint(x);
  }
}

TEST(Synthesize, DegreeLedger) {
  const auto& s = Ex4();
  const Dilation& d = s.system.dilation;
  const double kr0 = s.system.kr0();
  HomogeneityOptions opt;
  opt.tol = 1e-6;
  for (const auto& [name, fn] : std::vector<std::pair<std::string, ScalarFn>>{
           {"phi", s.phi}, {"H", s.H_kappa}, {"l", s.l}, {"l_bar", s.l_bar}, {"M", s.M},
           {"M1", s.M1}}) {
    EXPECT_TRUE(CheckHomogeneous(fn, 2.0 * kr0, d, opt).pass) << name;
  }
  for (const auto& [name, fn] : std::vector<std::pair<std::string, ScalarFn>>{
           {"alpha_s", s.alpha_s}, {"alpha", s.alpha}, {"alpha*", s.alpha_star}}) {
    EXPECT_TRUE(CheckHomogeneous(fn, kr0, d, opt).pass) << name;
  }
  EXPECT_TRUE(CheckHomogeneous(s.R, 0.0, d, opt).pass);
  EXPECT_TRUE(CheckHomogeneousField(s.f_tilde, s.system.k, d, opt).pass);
}

TEST(Synthesize, ControllerConsistency) {
  const auto& s = Ex4();
  const double th2 = s.system.theta * s.system.theta;
  for (const Vec& x : RandomPoints(2, 100, 11)) {
    const double via_r = -(s.beta * s.kappa / (2.0 * th2)) * s.lie->LG1V(x) / s.R(x);
    EXPECT_LT(Rel(s.alpha_star(x), via_r), 1e-10);
    EXPECT_LT(Rel(s.alpha_star(x), s.beta * s.kappa / 2.0 * s.alpha_s(x)), 1e-10);
  }
}

TEST(Synthesize, CompletedSquareIdentity) {
  const auto& s = Ex4();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uu(-5.0, 5.0);
  const double th2 = s.system.theta * s.system.theta;
  for (const Vec& x : RandomPoints(2, 200, 13)) {
    const double u = uu(rng);
    const Vec y = s.system.Output(x, u);
    const double lhs = s.l(x) + u * u * s.R1(x) + y.squaredNorm() * s.R2(x);
    const double rhs = s.l_bar(x) + 2.0 * th2 / s.kappa * u * u * s.R(x);
    EXPECT_LT(std::abs(lhs - rhs) / std::max(1e-300, std::abs(rhs)), 1e-9) << FormatPoint(x);
  }
}

TEST(Synthesize, PenaltyDominatesH) {
  const auto& s = Ex4();
  for (const SpherePoint& p : SphereSample(s.norm, 2048, 5)) {
    EXPECT_GE(s.l(p.coords), 2.0 * s.beta / s.kappa * s.H_kappa(p.coords) - 1e-12);
  }
}

TEST(Synthesize, ClosedFormsReparse) {
  const auto& s = Ex4();
  ASSERT_TRUE(s.expressions.count("alpha_star"));
  const Expr a = Parse(s.expressions.at("alpha_star"), 2);
  const Expr l = Parse(s.expressions.at("l"), 2);
  for (const Vec& x : RandomPoints(2, 20, 17)) {
    EXPECT_LT(Rel(a.Eval(x), s.alpha_star(x)), 1e-9);
    EXPECT_LT(Rel(l.Eval(x), s.l(x)), 1e-9);
  }
}

TEST(Synthesize, RejectsZeroTheta) {
  const ExampleFixture fx = BuiltinExample("ex3");
  SynthesisConfig c;
  c.pi_coeff = 1.0;
  try {
    Synthesize(fx.system, fx.lyapunov, c);
    FAIL();
  } catch (const SynthesisError& e) {
    EXPECT_EQ(e.stage(), "precondition");
    EXPECT_NE(std::string(e.what()).find("theta=0"), std::string::npos);
  }
}

TEST(Synthesize, SontagViolationDetected) {
  ExampleFixture fx = BuiltinExample("ex4");
  fx.system = MakeSystem({3.0, 1.0}, 0.0, {"x1 + x2^3", "0"}, {"0", "1"}, {{"0"}, {"1"}},
                         {"x2", "0"}, {0.0, 1.0});
  const LieDerivatives lie(fx.system, fx.lyapunov);
  const ScalarFn phi = BuildPhi(fx.system, fx.lyapunov, lie, 1.0);
  EXPECT_FALSE(CheckSontagCondition(fx.system, fx.lyapunov, lie, phi, 512, 1).empty());
  SynthesisConfig c = ConfigFromFixture(fx);
  try {
    Synthesize(fx.system, fx.lyapunov, c);
    FAIL();
  } catch (const SynthesisError& e) {
    EXPECT_EQ(e.stage(), "sontag");
  }
}

TEST(Q0, Example4AndDegenerateSets) {
  const ExampleFixture fx = BuiltinExample("ex4");
  const LieDerivatives lie(fx.system, fx.lyapunov);
  const PowerKInfinity gamma = BuildGamma(1.0, 2.0);
  const auto q0 = Predicate::Parse(fx.design->q0, 2);
  EXPECT_TRUE(ValidateQ0(fx.system, fx.lyapunov, lie, gamma, q0, 4096, 1).pass);
  const Q0Report all =
      ValidateQ0(fx.system, fx.lyapunov, lie, gamma, Predicate::Parse("true", 2), 4096, 1);
  EXPECT_FALSE(all.pass);
  EXPECT_FALSE(all.decrease_violations.empty());
  const Q0Report none =
      ValidateQ0(fx.system, fx.lyapunov, lie, gamma, Predicate::Parse("false", 2), 4096, 1);
  EXPECT_FALSE(none.pass);
  EXPECT_FALSE(none.zero_set_violations.empty());
}

TEST(SelectKappa, FloorAndMargin) {
  SphereConstants c;
  EXPECT_DOUBLE_EQ(SelectKappa(c, 0.043), 1.043);
  c.kappa_c = 0.36;
  c.kappa1 = 10.55;
  EXPECT_DOUBLE_EQ(SelectKappa(c, 0.0), 10.55);
  EXPECT_NEAR(SelectKappa(c, 0.043), 11.0, 0.01);
}

TEST(Gamma, Example4Choice) {
  const PowerKInfinity g = BuildGamma(1.0, 2.0);
  const PowerKInfinity ell = LfTransform(g);
  for (double s : {0.1, 1.0, 3.0}) EXPECT_NEAR(ell(2.0 * s), 0.5 * s * s, 1e-12);
}

}  // namespace
}  // namespace homopt
