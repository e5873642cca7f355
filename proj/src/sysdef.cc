#include "homopt/sysdef.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homopt/errors.h"

namespace homopt {

namespace {

double EvalAt(const Expr& e, const Vec& x) {
  try {
    return e.Eval(x);
  } catch (const EvalError& err) {
    throw EvalError(std::string(err.what()) + " at x = " + FormatPoint(x));
  }
}

Vec EvalAll(const std::vector<Expr>& es, const Vec& x) {
  Vec out(es.size());
  for (std::size_t i = 0; i < es.size(); ++i) out[i] = EvalAt(es[i], x);
  return out;
}

void CheckVars(const Expr& e, int n, const std::string& what) {
  if (e.MaxVarIndex() >= n) {
    throw DomainError(what + " references x" + std::to_string(e.MaxVarIndex() + 1) +
                      " but the state has dimension " + std::to_string(n));
  }
  if (e.UsesTime()) throw DomainError(what + " must not depend on t");
}

}  // namespace

void HomogeneousSystem::CheckShape() const {
  if (n < 1) throw DomainError("state dimension must be at least 1");
  if (dilation.dim() != n) throw DomainError("dilation has " + std::to_string(dilation.dim()) +
                                             " weights, expected " + std::to_string(n));
  if (static_cast<int>(f.size()) != n) throw DomainError("f must have n entries");
  if (static_cast<int>(G1.size()) != n) throw DomainError("G1 must have n entries");
  if (static_cast<int>(G2.size()) != n) throw DomainError("G2 must have n rows");
  for (const auto& row : G2) {
    if (static_cast<int>(row.size()) != xi) throw DomainError("every G2 row must have xi entries");
  }
  if (static_cast<int>(h.size()) != l_out) throw DomainError("h must have l_out entries");
  if (d.size() != l_out) throw DomainError("d must have l_out entries");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("theta must be finite and >= 0");
  for (int i = 0; i < n; ++i) {
    CheckVars(f[i], n, "f");
    CheckVars(G1[i], n, "G1");
    for (const Expr& e : G2[i]) CheckVars(e, n, "G2");
  }
  for (const Expr& e : h) CheckVars(e, n, "h");
}

Vec HomogeneousSystem::F(const Vec& x) const { return EvalAll(f, x); }
Vec HomogeneousSystem::G1At(const Vec& x) const { return EvalAll(G1, x); }

Eigen::MatrixXd HomogeneousSystem::G2At(const Vec& x) const {
  Eigen::MatrixXd m(n, xi);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < xi; ++j) m(i, j) = EvalAt(G2[i][j], x);
  }
  return m;
}

Vec HomogeneousSystem::H(const Vec& x) const { return EvalAll(h, x); }

Vec HomogeneousSystem::Output(const Vec& x, double u) const { return H(x) + d * u; }

HomogeneousNorm NormFor(const HomogeneousSystem& sys, const LyapunovCandidate& lyap) {
  return HomogeneousNorm(sys.dilation, lyap.nu);
}

HomogeneousSystem MakeSystem(const std::vector<double>& weights, double k,
                             const std::vector<std::string>& f,
                             const std::vector<std::string>& G1,
                             const std::vector<std::vector<std::string>>& G2,
                             const std::vector<std::string>& h, const std::vector<double>& d,
                             std::optional<double> theta) {
  HomogeneousSystem sys;
  sys.n = static_cast<int>(weights.size());
  sys.dilation = Dilation(weights);
  sys.k = k;
  sys.xi = G2.empty() ? 0 : static_cast<int>(G2.front().size());
  sys.l_out = static_cast<int>(h.size());
  for (const auto& s : f) sys.f.push_back(Parse(s, sys.n));
  for (const auto& s : G1) sys.G1.push_back(Parse(s, sys.n));
  for (const auto& row : G2) {
    std::vector<Expr> r;
    for (const auto& s : row) r.push_back(Parse(s, sys.n));
    sys.G2.push_back(std::move(r));
  }
  for (const auto& s : h) sys.h.push_back(Parse(s, sys.n));
  sys.d = Eigen::Map<const Vec>(d.data(), static_cast<Eigen::Index>(d.size()));
  sys.theta = theta ? *theta : sys.d.norm();
  sys.CheckShape();
  return sys;
}

// ---------------------------------------------------------------------------

namespace {

Expr DotGradient(const std::vector<Expr>& grad, const std::vector<Expr>& field) {
  Expr sum = Expr::Constant(0.0);
  bool first = true;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (grad[i].is_zero() || field[i].is_zero()) continue;
    Expr term = grad[i] * field[i];
    sum = first ? term : sum + term;
    first = false;
  }
  return sum;
}

}  // namespace

LieDerivatives::LieDerivatives(const HomogeneousSystem& sys, const LyapunovCandidate& lyap)
    : v_(lyap.V) {
  CheckVars(v_, sys.n, "V");
  for (int i = 0; i < sys.n; ++i) grad_.push_back(v_.Diff(i));
  lfv_ = DotGradient(grad_, sys.f);
  lg1v_ = DotGradient(grad_, sys.G1);
  for (int j = 0; j < sys.xi; ++j) {
    std::vector<Expr> column;
    for (int i = 0; i < sys.n; ++i) column.push_back(sys.G2[i][j]);
    lg2v_.push_back(DotGradient(grad_, column));
  }
}

double LieDerivatives::V(const Vec& x) const { return x.isZero(0.0) ? 0.0 : EvalAt(v_, x); }

Vec LieDerivatives::Gradient(const Vec& x) const {
  if (x.isZero(0.0)) return Vec::Zero(x.size());
  return EvalAll(grad_, x);
}

double LieDerivatives::LfV(const Vec& x) const { return x.isZero(0.0) ? 0.0 : EvalAt(lfv_, x); }

double LieDerivatives::LG1V(const Vec& x) const {
  return x.isZero(0.0) ? 0.0 : EvalAt(lg1v_, x);
}

Vec LieDerivatives::LG2V(const Vec& x) const {
  if (x.isZero(0.0)) return Vec::Zero(lg2v_.size());
  return EvalAll(lg2v_, x);
}

double LieDerivatives::Along(const Vec& x, const Vec& field) const {
  return Gradient(x).dot(field);
}

LieDerivatives MakeLieDerivatives(const HomogeneousSystem& sys, const LyapunovCandidate& lyap) {
  return LieDerivatives(sys, lyap);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

ValidationCheck FromHomogeneity(const std::string& name, const std::string& what,
                                const std::function<HomogeneityReport()>& run) {
  ValidationCheck c{name, true, 0.0, ""};
  try {
    const HomogeneityReport r = run();
    c.pass = r.pass;
    c.max_error = r.max_rel_error;
    if (!r.pass) {
      c.detail = what + " fails scaling at x = " + FormatPoint(r.worst_point) +
                 ", eps = " + std::to_string(r.worst_eps);
    }
  } catch (const Error& e) {
    c.pass = false;
    c.max_error = std::numeric_limits<double>::infinity();
    c.detail = e.what();
  }
  return c;
}

// f(0) = 0 style checks. Where the expression is undefined at the origin
// the positive homogeneity degree gives the limit 0.
ValidationCheck OriginCheck(const std::string& name, const std::vector<Expr>& es,
                            const std::vector<double>& degrees, int n) {
  ValidationCheck c{name, true, 0.0, ""};
  const Vec zero = Vec::Zero(n);
  for (std::size_t i = 0; i < es.size(); ++i) {
    try {
      const double v = es[i].Eval(zero);
      c.max_error = std::max(c.max_error, std::abs(v));
      if (v != 0.0) {
        c.pass = false;
        c.detail = "component " + std::to_string(i + 1) + " is nonzero at the origin";
      }
    } catch (const EvalError&) {
      if (!(degrees[i] > 0.0)) {
        c.pass = false;
        c.detail = "component " + std::to_string(i + 1) +
                   " is undefined at the origin and has nonpositive degree";
      }
    }
  }
  return c;
}

}  // namespace

ValidationReport ValidateSystem(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                                int samples, double tol, std::uint64_t seed) {
  ValidationReport report;
  auto add = [&](ValidationCheck c) {
    report.pass = report.pass && c.pass;
    report.checks.push_back(std::move(c));
  };

  try {
    sys.CheckShape();
    add({"shape", true, 0.0, ""});
  } catch (const Error& e) {
    add({"shape", false, std::numeric_limits<double>::infinity(), e.what()});
    report.synthesizable = false;
    return report;
  }

  const Dilation& dil = sys.dilation;
  const double r0 = sys.r0();
  const double kr0 = sys.kr0();
  HomogeneityOptions opt;
  opt.samples = samples;
  opt.tol = tol;
  opt.seed = seed;

  add({"degree k + r0 > 0", kr0 > 0.0, 0.0,
       kr0 > 0.0 ? "" : "k + r0 = " + std::to_string(kr0) + " is not positive"});

  add(FromHomogeneity("f homogeneous of degree k", "f", [&] {
    return CheckHomogeneousField([&](const Vec& x) { return sys.F(x); }, sys.k, dil, opt);
  }));
  add(FromHomogeneity("G1 homogeneous of degree -r0", "G1", [&] {
    return CheckHomogeneousField([&](const Vec& x) { return sys.G1At(x); }, -r0, dil, opt);
  }));
  for (int j = 0; j < sys.xi; ++j) {
    add(FromHomogeneity("G2 column " + std::to_string(j + 1) + " homogeneous of degree -r0",
                        "G2", [&] {
                          return CheckHomogeneousField(
                              [&](const Vec& x) { return Vec(sys.G2At(x).col(j)); }, -r0, dil,
                              opt);
                        }));
  }
  if (sys.l_out > 0) {
    add(FromHomogeneity("h homogeneous of degree k + r0", "h", [&] {
      return CheckHomogeneousComponents([&](const Vec& x) { return sys.H(x); },
                                        std::vector<double>(sys.l_out, kr0), dil, opt);
    }));
  }

  // h(x)^T d == 0 and d^T d == theta^2.
  {
    ValidationCheck c{"h^T d = 0", true, 0.0, ""};
    const double dn = sys.d.norm();
    try {
      for (const SpherePoint& p :
           SphereSample(HomogeneousNorm(dil, dil.max_weight() + 1.0), 256, seed)) {
        const Vec hx = sys.H(p.coords);
        const double rel = std::abs(hx.dot(sys.d)) / std::max(hx.norm() * dn, 1e-300);
        if (hx.dot(sys.d) != 0.0 && rel > c.max_error) {
          c.max_error = rel;
          if (rel > tol) c.detail = "h^T d != 0 at x = " + FormatPoint(p.coords);
        }
      }
    } catch (const Error& e) {
      c.max_error = std::numeric_limits<double>::infinity();
      c.detail = e.what();
    }
    c.pass = c.max_error <= tol;
    add(c);
    const double err = std::abs(sys.d.squaredNorm() - sys.theta * sys.theta);
    add({"d^T d = theta^2", err <= tol * std::max(1.0, sys.theta * sys.theta), err,
         err <= tol ? "" : "d^T d = " + std::to_string(sys.d.squaredNorm())});
  }

  {
    std::vector<double> fdeg(sys.n);
    for (int i = 0; i < sys.n; ++i) fdeg[i] = sys.k + dil.weight(i);
    add(OriginCheck("f(0) = 0", sys.f, fdeg, sys.n));
    add(OriginCheck("h(0) = 0", sys.h, std::vector<double>(sys.l_out, kr0), sys.n));
  }

  // Lyapunov candidate.
  const double vdeg = sys.k + 2.0 * r0;
  add({"V degree equals k + 2 r0", std::abs(lyap.degree - vdeg) <= 1e-12,
       std::abs(lyap.degree - vdeg),
       std::abs(lyap.degree - vdeg) <= 1e-12
           ? ""
           : "declared " + std::to_string(lyap.degree) + ", expected " + std::to_string(vdeg)});
  add(FromHomogeneity("V homogeneous of declared degree", "V", [&] {
    return CheckHomogeneous([&](const Vec& x) { return EvalAt(lyap.V, x); }, lyap.degree, dil,
                            opt);
  }));

  std::optional<HomogeneousNorm> norm;
  try {
    norm.emplace(dil, lyap.nu);
    add({"norm exponent nu > max r_i", true, 0.0, ""});
  } catch (const Error& e) {
    add({"norm exponent nu > max r_i", false, 0.0, e.what()});
  }
  if (norm) {
    ValidationCheck c{"V positive on the sphere", true, 0.0, ""};
    try {
      double vmin = std::numeric_limits<double>::infinity();
      for (const SpherePoint& p : SphereSample(*norm, std::max(1024, 16 * samples), seed)) {
        const double v = EvalAt(lyap.V, p.coords);
        if (v < vmin) {
          vmin = v;
          if (!(v > 0.0)) c.detail = "V <= 0 at x = " + FormatPoint(p.coords);
        }
      }
      c.max_error = vmin;
      c.pass = vmin > 0.0;
    } catch (const Error& e) {
      c.pass = false;
      c.detail = e.what();
    }
    add(c);
  }

  try {
    const LieDerivatives lie(sys, lyap);
    add(FromHomogeneity("L_f V homogeneous of degree 2(k + r0)", "L_f V", [&] {
      return CheckHomogeneous([&](const Vec& x) { return lie.LfV(x); }, 2.0 * kr0, dil, opt);
    }));
    add(FromHomogeneity("L_G1 V homogeneous of degree k + r0", "L_G1 V", [&] {
      return CheckHomogeneous([&](const Vec& x) { return lie.LG1V(x); }, kr0, dil, opt);
    }));
    if (sys.xi > 0) {
      add(FromHomogeneity("L_G2 V homogeneous of degree k + r0", "L_G2 V", [&] {
        return CheckHomogeneousComponents([&](const Vec& x) { return lie.LG2V(x); },
                                          std::vector<double>(sys.xi, kr0), dil, opt);
      }));
    }
  } catch (const Error& e) {
    add({"Lie derivatives", false, std::numeric_limits<double>::infinity(), e.what()});
  }

  if (!(sys.theta > 0.0)) {
    report.synthesizable = false;
    report.note = "fixture-only: synthesis pipeline requires theta>0";
  }
  if (!report.pass) report.synthesizable = false;
  return report;
}

// ---------------------------------------------------------------------------
// Fixtures

namespace {

std::string Sub(std::string text, const std::string& key, const std::string& value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos;
       pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

ExampleFixture Example1() {
  ExampleFixture fx;
  fx.id = "ex1";
  fx.description = "x' = x^3 + u + w, y = x, V = x^4/4, u = -6x^3";
  fx.system = MakeSystem({1.0}, 2.0, {"x1^3"}, {"1"}, {{"1"}}, {"x1"}, {0.0});
  fx.lyapunov = {Parse("0.25*x1^4", 1), 4.0, 2.0};
  fx.controller = Parse("-6*x1^3", 1);
  fx.cost = FixtureCost{Parse("x1^4", 1), Parse("4*x1^6", 1), Parse("1/3", 1), Parse("0", 1),
                        PowerKInfinity(1.0, 2.0)};
  return fx;
}

ExampleFixture Example2() {
  ExampleFixture fx;
  fx.id = "ex2";
  fx.description = "x' = x^3 + u + w, y = x, V = x^2/2, u = -4x^3 - 2.5x";
  fx.system = MakeSystem({1.0}, 2.0, {"x1^3"}, {"1"}, {{"1"}}, {"x1"}, {0.0});
  fx.lyapunov = {Parse("0.5*x1^2", 1), 2.0, 2.0};
  fx.controller = Parse("-4*x1^3 - 2.5*x1", 1);
  fx.cost = FixtureCost{Parse("2*x1^2", 1), Parse("4*x1^4", 1), Parse("1/(2*x1^2 + 5/4)", 1),
                        Parse("1", 1), PowerKInfinity(1.0, 2.0)};
  return fx;
}

ExampleFixture Example3() {
  ExampleFixture fx;
  fx.id = "ex3";
  fx.description = "x1' = -x1^3 + x2^3, x2' = u + w, y = x2^3, V = (x1^4 + x2^4)/4";
  fx.system = MakeSystem({1.0, 1.0}, 2.0, {"-x1^3 + x2^3", "0"}, {"0", "1"}, {{"0"}, {"1"}},
                         {"x2^3"}, {0.0});
  fx.lyapunov = {Parse("(x1^4 + x2^4)/4", 2), 4.0, 2.0};
  const std::string w = "(-x1^6 + x1^3*x2^3 + apow(x2, 3)*pow(x1^2 + x2^2, 3/2))";
  const std::string root = "sqrt(W^2 + x2^12)";
  fx.controller = Parse(Sub(Sub("-x2^9/(ROOT - W)", "ROOT", root), "W", w), 2);
  const std::string lbar =
      "2*(-W + ROOT) + 4*(apow(x2, 3)*pow(x1^2 + x2^2, 3/2) - x2^6)";
  fx.cost = FixtureCost{Parse("x1^4 + x2^4", 2),
                        Parse(Sub(Sub(lbar + " - x2^6", "ROOT", root), "W", w), 2),
                        Parse(Sub(Sub("2*x2^6/(W + ROOT)", "ROOT", root), "W", w), 2),
                        Parse("1", 2), PowerKInfinity(1.0, 2.0)};
  return fx;
}

ExampleFixture Example4() {
  ExampleFixture fx;
  fx.id = "ex4";
  fx.description = "x1' = -x1 + x2^3, x2' = u + w, y = (x2, u), V = (x1^{4/3} + x2^4)^{1/2}";
  fx.system = MakeSystem({3.0, 1.0}, 0.0, {"-x1 + x2^3", "0"}, {"0", "1"}, {{"0"}, {"1"}},
                         {"x2", "0"}, {0.0, 1.0});
  fx.lyapunov = {Parse("pow(apow(x1, 4/3) + x2^4, 1/2)", 2), 2.0, 4.0};

  // Closed forms with c10 = 1, pi(s) = s, kappa = 11, beta = 2.
  auto expand = [](std::string t) {
    t = Sub(t, "SQ", "sqrt(PHI^2 + L^4)");
    t = Sub(t, "PHI", "(LFV + abs(L)*GAM)");
    t = Sub(t, "LFV", "(2/3*spow(x1, 1/3)*pow(S, -1/2)*(-x1 + x2^3))");
    t = Sub(t, "GAM", "pow(apow(x1, 4/3) + apow(x2, 4), 1/4)");
    t = Sub(t, "L", "(2*x2^3*pow(S, -1/2))");
    t = Sub(t, "S", "(apow(x1, 4/3) + x2^4)");
    return t;
  };
  fx.controller = Parse(expand("-11*(L + L^3/(SQ - PHI))"), 2);
  const std::string r = "((SQ - PHI)/(SQ - PHI + L^2))";
  const std::string l =
      "4*(1/2*(SQ - PHI) + 11/2*L^2 + 5*(PHI + SQ)"
      " + 2*apow(x2, 3)*pow(S, -1)*(pow(S, 3/4) - apow(x2, 3))) - x2^2*" +
      r + "/11";
  fx.cost = FixtureCost{Parse(expand("4*pow(S, 1/2)"), 2), Parse(expand(l), 2),
                        Parse(expand(r + "/11"), 2), Parse(expand(r + "/11"), 2),
                        PowerKInfinity(2.0, 2.0)};
  FixtureDesign design;
  design.c10 = 1.0;
  design.pi_coeff = 1.0;
  design.q0 = "abs(x1) >= 4*abs(x2)^3";
  design.beta = 2.0;
  design.lambda = 2.0;
  design.kappa = 11.0;
  fx.design = design;
  return fx;
}

}  // namespace

std::vector<ExampleFixture> BuiltinExamples() {
  return {Example1(), Example2(), Example3(), Example4()};
}

ExampleFixture BuiltinExample(const std::string& id) {
  if (id == "ex1") return Example1();
  if (id == "ex2") return Example2();
  if (id == "ex3") return Example3();
  if (id == "ex4") return Example4();
  throw DomainError("unknown example '" + id + "' (expected ex1, ex2, ex3 or ex4)");
}

}  // namespace homopt
