#include "homopt/sim.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "homopt/errors.h"

namespace homopt {
namespace {

ScalarFn Fn(const Expr& e) {
  return [e](const Vec& x) { return e.Eval(x); };
}

TEST(WorstCase, Example2) {
  const ExampleFixture fx = BuiltinExample("ex2");
  const LieDerivatives lie(fx.system, fx.lyapunov);
  const PowerKInfinity g(1.0, 2.0);
  const Vec x = Vec::Ones(1);
  const Vec w = WorstCaseW(lie, g, 2.0, x);
  EXPECT_NEAR(w[0], 2.0, 1e-12);
  EXPECT_NEAR(DeltaW(lie, g, 2.0, 2.0, x, w), 0.0, 1e-10);
  double best = -1e300, arg = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double wi = -10.0 + 20.0 * i / 20000.0;
    const double v = DeltaW(lie, g, 2.0, 2.0, x, Vec::Constant(1, wi));
    if (v > best) best = v, arg = wi;
  }
  EXPECT_NEAR(arg, 2.0, 1e-3);
  EXPECT_TRUE(WorstCaseW(lie, g, 2.0, Vec::Zero(1)).isZero(0.0));
}

TEST(WorstCase, MaximizesDeltaW) {
  const ExampleFixture fx = BuiltinExample("ex4");
  const LieDerivatives lie(fx.system, fx.lyapunov);
  const PowerKInfinity g(2.0, 2.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const Vec x = Eigen::Vector2d(u(rng), u(rng));
    const Vec w = WorstCaseW(lie, g, 1.5, x);
    const double top = DeltaW(lie, g, 1.5, 2.0, x, w);
    EXPECT_NEAR(top, 0.0, 1e-10);
    for (int j = 0; j < 100; ++j) {
      EXPECT_LE(DeltaW(lie, g, 1.5, 2.0, x, w + Vec::Constant(1, 0.1 * u(rng))), top + 1e-10);
    }
  }
  // |w*| = lambda mu |L_G2 V| for gamma = s^2 / mu.
  const Vec x = Eigen::Vector2d(0.3, -0.7);
  EXPECT_NEAR(WorstCaseW(lie, g, 1.5, x).norm(), 1.5 * 0.5 * lie.LG2V(x).norm(), 1e-12);
}

TEST(Quadrature, SimpsonExactForQuadratics) {
  std::vector<double> t{0.0, 0.1, 0.35, 0.4, 1.0, 1.3, 2.0};
  std::vector<double> f;
  for (double s : t) f.push_back(3.0 * s * s - s + 2.0);
  auto F = [](double s) { return s * s * s - 0.5 * s * s + 2.0 * s; };
  const auto c = CumulativeSimpson(t, f);
  for (size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(c[i], F(t[i]), 1e-12);
  t.pop_back();
  f.pop_back();
  EXPECT_NEAR(Simpson(t, f), F(t.back()), 1e-12);
}

TEST(Integrate, Example1ClosedForm) {
  const ExampleFixture fx = BuiltinExample("ex1");
  const Trajectory tr = Integrate(fx.system, Fn(*fx.controller), DisturbanceSpec::Zero(),
                                  Vec::Ones(1), 10.0);
  ASSERT_GE(tr.times.size(), 1000u);
  double err = 0.0;
  for (size_t i = 0; i < tr.times.size(); ++i) {
    err = std::max(err, std::abs(tr.states[i][0] - 1.0 / std::sqrt(1.0 + 10.0 * tr.times[i])));
    EXPECT_EQ(tr.y[i], fx.system.Output(tr.states[i], tr.u[i]));
    if (i) EXPECT_GT(tr.times[i], tr.times[i - 1]);
  }
  EXPECT_LE(err, 1e-6);
  const CostBreakdown cb = EvaluateCost(tr, CostFromFixture(*fx.cost));
  EXPECT_NEAR(cb.int_y2, 0.1 * std::log(101.0), 1e-4);
  EXPECT_NEAR(cb.J, cb.terminal + cb.int_l + cb.int_uR1u + cb.int_yR2y - cb.int_gamma0, 1e-12);
  EXPECT_THROW(EvaluateCost(tr, CostFromFixture(*fx.cost), 11.0), DomainError);
}

TEST(Integrate, ZeroInitialState) {
  const ExampleFixture fx = BuiltinExample("ex4");
  const Trajectory tr = Integrate(fx.system, Fn(*fx.controller), DisturbanceSpec::Zero(),
                                  Vec::Zero(2), 1.0);
  EXPECT_TRUE(tr.terminated_at_origin);
  for (const Vec& x : tr.states) EXPECT_TRUE(x.isZero(0.0));
  const CostBreakdown cb = EvaluateCost(tr, CostFromFixture(*fx.cost));
  EXPECT_EQ(cb.J, 0.0);
}

TEST(Integrate, Example2WorstCaseMonotone) {
  const ExampleFixture fx = BuiltinExample("ex2");
  auto lie = std::make_shared<LieDerivatives>(fx.system, fx.lyapunov);
  const Trajectory tr =
      Integrate(fx.system, Fn(*fx.controller),
                DisturbanceSpec::WorstCase(lie, PowerKInfinity(1.0, 2.0), 2.0), Vec::Ones(1), 5.0);
  for (size_t i = 1; i < tr.states.size(); ++i) {
    EXPECT_LT(tr.states[i][0], tr.states[i - 1][0]);
    const double x = tr.states[i][0];
    EXPECT_NEAR(tr.w[i][0], 2.0 * x, 1e-12);
  }
}

TEST(Integrate, Errors) {
  const ExampleFixture fx = BuiltinExample("ex1");
  EXPECT_THROW(Integrate(fx.system, Fn(*fx.controller), DisturbanceSpec::Zero(), Vec::Ones(1),
                         0.0),
               DomainError);
  // x' = x^3 blows up at t = 1/2 from x0 = 1.
  EXPECT_THROW(Integrate(fx.system, [](const Vec&) { return 0.0; }, DisturbanceSpec::Zero(),
                         Vec::Ones(1), 2.0),
               DomainError);
}

TEST(Integrate, FractionalPowerClampsAtOrigin) {
  const HomogeneousSystem sys =
      MakeSystem({1.0}, -0.5, {"0"}, {"1"}, {{"1"}}, {"x1"}, {0.0});
  const Trajectory tr = Integrate(sys, [](const Vec& x) { return -std::cbrt(x[0]); },
                                  DisturbanceSpec::Zero(), Vec::Ones(1), 3.0);
  EXPECT_TRUE(tr.terminated_at_origin);
  EXPECT_NEAR(tr.origin_time, 1.5, 1e-3);
  EXPECT_EQ(tr.times.back(), 3.0);
}

TEST(CostIdentity, Example2Pathwise) {
  const ExampleFixture fx = BuiltinExample("ex2");
  auto lie = std::make_shared<LieDerivatives>(fx.system, fx.lyapunov);
  const auto w = DisturbanceSpec::WorstCase(lie, PowerKInfinity(1.0, 2.0), 2.0);
  for (double T : {1.0, 5.0, 20.0}) {
    for (double x0 : {0.5, 1.0, 2.0}) {
      const Trajectory tr =
          Integrate(fx.system, Fn(*fx.controller), w, Vec::Constant(1, x0), T);
      const CostBreakdown cb = EvaluateCost(tr, CostFromFixture(*fx.cost));
      EXPECT_NEAR(cb.J / (2.0 * x0 * x0), 1.0, 1e-6) << "T=" << T << " x0=" << x0;
      for (double rj : cb.running_J) EXPECT_NEAR(rj, 2.0 * x0 * x0, 1e-6 * 2.0 * x0 * x0);
    }
  }
}

TEST(CostIdentity, Example4) {
  const ExampleFixture fx = BuiltinExample("ex4");
  const SynthesizedController s = Synthesize(fx.system, fx.lyapunov, ConfigFromFixture(fx));
  const auto rep = CostIdentityCheck(s, Eigen::Vector2d(1.0, 0.5), 20.0);
  ASSERT_EQ(rep.cases.size(), 5u);
  for (const auto& c : rep.cases) EXPECT_TRUE(c.pass) << c.label << " J=" << c.J;
  EXPECT_TRUE(rep.pass);
  const auto zero = CostIdentityCheck(s, Vec::Zero(2), 1.0);
  EXPECT_TRUE(zero.pass);

  const Trajectory tr = Integrate(s.system, s.alpha_star, DisturbanceSpec::Zero(),
                                  Eigen::Vector2d(1.0, 0.5), 10.0, {},
                                  [&](const Vec& x) { return s.lie->V(x); });
  for (size_t i = 1; i < tr.V_vals.size(); ++i) EXPECT_LE(tr.V_vals[i], tr.V_vals[i - 1] + 1e-12);
}

TEST(CostIdentity, ToleranceConvergence) {
  const ExampleFixture fx = BuiltinExample("ex2");
  auto lie = std::make_shared<LieDerivatives>(fx.system, fx.lyapunov);
  const auto w = DisturbanceSpec::WorstCase(lie, PowerKInfinity(1.0, 2.0), 2.0);
  IntegrateOptions a, b;
  a.tol = 1e-8;
  b.tol = 0.5e-8;
  const CostPieces cost = CostFromFixture(*fx.cost);
  const double ja = EvaluateCost(Integrate(fx.system, Fn(*fx.controller), w, Vec::Ones(1), 5.0, a), cost).J;
  const double jb = EvaluateCost(Integrate(fx.system, Fn(*fx.controller), w, Vec::Ones(1), 5.0, b), cost).J;
  EXPECT_LT(std::abs(ja - jb), 1e-6 * 2.0);
}

TEST(L2Gain, Example2Sinusoid) {
  const ExampleFixture fx = BuiltinExample("ex2");
  const Trajectory tr = Integrate(fx.system, Fn(*fx.controller),
                                  DisturbanceSpec::Sinusoid(Vec::Ones(1), 3.0, 0.0, 0.1),
                                  Vec::Ones(1), 50.0);
  const L2GainReport r = L2GainCheck(tr, 1.0, 1.0, 1e-6);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.w_norm, 0.0);
  const Trajectory still = Integrate(fx.system, Fn(*fx.controller), DisturbanceSpec::Zero(),
                                     Vec::Ones(1), 50.0);
  EXPECT_TRUE(L2GainCheck(still, 1.0, 1.0).pass);
  EXPECT_NEAR(L2GainCheck(still, 1.0, 1.0).w_norm, 0.0, 0.0);
}

TEST(Disturbance, Kinds) {
  const Vec x = Vec::Ones(2);
  EXPECT_TRUE(DisturbanceSpec::Zero()(0.3, x, 1).isZero(0.0));
  EXPECT_EQ(DisturbanceSpec::Constant(Vec::Constant(1, 2.5))(0.3, x, 1)[0], 2.5);
  EXPECT_NEAR(DisturbanceSpec::Sinusoid(Vec::Constant(1, 2.0), 3.0, 0.5, 0.1)(1.0, x, 1)[0],
              2.0 * std::sin(3.5) * std::exp(-0.1), 1e-15);
  const auto c = DisturbanceSpec::Custom({Parse("x1 + t", 2)});
  EXPECT_DOUBLE_EQ(c(2.0, x, 1)[0], 3.0);
  EXPECT_THROW(DisturbanceSpec::Constant(Vec::Ones(2))(0.0, x, 1), DomainError);
}

TEST(Csv, HeaderAndPrecision) {
  const ExampleFixture fx = BuiltinExample("ex4");
  const Trajectory tr = Integrate(fx.system, Fn(*fx.controller), DisturbanceSpec::Zero(),
                                  Eigen::Vector2d(1.0, 0.5), 1.0);
  const CostBreakdown cb = EvaluateCost(tr, CostFromFixture(*fx.cost));
  const std::string csv = TrajectoryCsv(tr, cb.running_J);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2,u,w1,y1,y2,V,running_J");
  EXPECT_NE(csv.find("\n0,1,0.5,"), std::string::npos);
  size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, tr.times.size() + 1);
}

}  // namespace
}  // namespace homopt
