#include "homopt/synthesis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "homopt/errors.h"

namespace homopt {

void SynthesisConfig::Validate() const {
  if (!(c10 > 0.0)) throw DomainError("c10 must be positive");
  if (!(beta >= 2.0)) throw DomainError("beta must be >= 2");
  if (!(lambda > 0.0 && lambda <= 2.0)) throw DomainError("lambda must lie in (0, 2]");
  if (!(kappa_margin >= 0.0)) throw DomainError("kappa_margin must be >= 0");
  if (pi_coeff && !(*pi_coeff > 0.0)) throw DomainError("pi_coeff must be positive");
  if (kappa && !(*kappa >= 1.0)) throw DomainError("kappa must be >= 1");
}

SynthesisConfig ConfigFromFixture(const ExampleFixture& fx) {
  if (!fx.design) throw DomainError(fx.id + " has no synthesis design");
  SynthesisConfig c;
  c.c10 = fx.design->c10;
  c.pi_coeff = fx.design->pi_coeff;
  c.q0 = Predicate::Parse(fx.design->q0, fx.system.n);
  c.beta = fx.design->beta;
  c.lambda = fx.design->lambda;
  c.kappa = fx.design->kappa;
  c.kappa_margin = fx.design->kappa_margin;
  return c;
}

namespace {

struct SontagTerms {
  double lg1v = 0.0;
  double phi = 0.0;
  double ratio = 0.0;  // (phi + sqrt(phi^2 + L^4)) / L^2
  bool zero_branch = true;
};

SontagTerms Terms(const Vec& x, const HomogeneousNorm& norm, double kr0,
                  const LieDerivatives& lie, const ScalarFn& phi) {
  SontagTerms t;
  if (x.isZero(0.0)) return t;
  t.lg1v = lie.LG1V(x);
  t.phi = phi(x);
  const double scale = std::pow(norm(x), kr0);
  if (std::abs(t.lg1v) <= kSwitchTol * scale) return t;
  t.zero_branch = false;
  const double l2 = t.lg1v * t.lg1v;
  const double root = std::hypot(t.phi, l2);
  t.ratio = t.phi >= 0.0 ? (t.phi + root) / l2 : l2 / (root - t.phi);
  return t;
}

double SquaredNorm(const Vec& v) { return v.squaredNorm(); }

}  // namespace

ScalarFn BuildPhi(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                  const LieDerivatives& lie, double c6) {
  if (!(c6 > 0.0)) throw DomainError("c6 must be positive");
  const HomogeneousNorm norm = NormFor(sys, lyap);
  const double kr0 = sys.kr0();
  return [lie, norm, kr0, c6](const Vec& x) {
    if (x.isZero(0.0)) return 0.0;
    return lie.LfV(x) + lie.LG2V(x).norm() * c6 * std::pow(norm(x), kr0);
  };
}

ScalarFn SontagController(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                          const LieDerivatives& lie, const ScalarFn& phi, double c10) {
  const HomogeneousNorm norm = NormFor(sys, lyap);
  const double kr0 = sys.kr0();
  return [lie, norm, kr0, phi, c10](const Vec& x) {
    const SontagTerms t = Terms(x, norm, kr0, lie, phi);
    if (t.zero_branch) return 0.0;
    return -(c10 + t.ratio) * t.lg1v;
  };
}

ScalarFn BuildR(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                const LieDerivatives& lie, const ScalarFn& phi, double c10) {
  if (!(sys.theta > 0.0)) throw DomainError("R requires theta > 0");
  const HomogeneousNorm norm = NormFor(sys, lyap);
  const double kr0 = sys.kr0();
  const double th2 = sys.theta * sys.theta;
  return [lie, norm, kr0, phi, c10, th2](const Vec& x) {
    const SontagTerms t = Terms(x, norm, kr0, lie, phi);
    if (t.zero_branch) return 1.0 / (th2 * c10);
    return 1.0 / (th2 * (c10 + t.ratio));
  };
}

PowerKInfinity BuildGamma(double c6, double c8) {
  if (!(c8 > 0.0)) throw DomainError("c8 must be positive (L_G2 V vanishes on the sphere)");
  return PowerKInfinity(c8 / c6, 2.0);
}

VectorFn BuildAuxField(const HomogeneousSystem& sys, const LieDerivatives& lie,
                       const PowerKInfinity& gamma) {
  const PowerKInfinity ell = LfTransform(gamma);
  return [sys, lie, ell](const Vec& x) -> Vec {
    if (x.isZero(0.0)) return Vec::Zero(sys.n);
    Vec out = sys.F(x);
    const Vec b = lie.LG2V(x);
    const double nb2 = SquaredNorm(b);
    if (nb2 == 0.0) return out;
    const double scale = ell(2.0 * std::sqrt(nb2)) / nb2;
    out += sys.G2At(x) * (b * scale);
    return out;
  };
}

ScalarFn AuxLieDerivative(const LieDerivatives& lie, const PowerKInfinity& gamma) {
  const PowerKInfinity ell = LfTransform(gamma);
  return [lie, ell](const Vec& x) {
    if (x.isZero(0.0)) return 0.0;
    return lie.LfV(x) + ell(2.0 * lie.LG2V(x).norm());
  };
}

std::vector<SontagViolation> CheckSontagCondition(const HomogeneousSystem& sys,
                                                  const LyapunovCandidate& lyap,
                                                  const LieDerivatives& lie, const ScalarFn& phi,
                                                  int samples, std::uint64_t seed) {
  std::vector<SontagViolation> out;
  for (const SpherePoint& p : SphereSample(NormFor(sys, lyap), samples, seed)) {
    const double lg = lie.LG1V(p.coords);
    if (std::abs(lg) > 1e-6) continue;
    const double ph = phi(p.coords);
    if (ph > -1e-9) out.push_back({p.coords, ph, lg});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constants

namespace {

SphereBudget BudgetFor(const SynthesisConfig& config) { return config.budget; }

SphereOptimum Optimize(const std::string& what, const ScalarFn& obj, const HomogeneousNorm& norm,
                       OptimizeMode mode, const SynthesisConfig& config,
                       const PointPredicate& constraint, SphereConstants& out) {
  try {
    SphereOptimum r = SphereOptimize(obj, norm, mode, BudgetFor(config), config.seed, constraint);
    out.argpoints[what] = r.argpoint;
    out.n_evals += r.n_evals;
    return r;
  } catch (const DomainError& e) {
    throw SynthesisError("constants", what + ": " + e.what());
  }
}

}  // namespace

SphereConstants EstimateDesignConstants(const HomogeneousSystem& sys,
                                        const LyapunovCandidate& lyap, const LieDerivatives& lie,
                                        const SynthesisConfig& config) {
  SphereConstants c;
  const HomogeneousNorm norm = NormFor(sys, lyap);
  c.c2 = Optimize("c2", [&](const Vec& x) { return lie.LG2V(x).norm(); }, norm,
                  OptimizeMode::kMax, config, {}, c)
             .value;
  c.c8 = c.c2;
  c.argpoints["c8"] = c.argpoints["c2"];
  if (config.known_stabilizer) {
    const Expr ah = *config.known_stabilizer;
    c.c1_h = Optimize(
                 "c1_h",
                 [&](const Vec& x) { return -(lie.LfV(x) + lie.LG1V(x) * ah.Eval(x)); }, norm,
                 OptimizeMode::kMin, config, {}, c)
                 .value;
    if (!(*c.c1_h > 0.0)) {
      throw SynthesisError("design-constants",
                           "known stabilizer does not make V decrease on the sphere (c1_h = " +
                               std::to_string(*c.c1_h) + ")");
    }
    c.c3 = *c.c1_h / 2.0;
    c.c4 = 2.0 * c.c2 * c.c2 / *c.c1_h;
    c.c5 = std::sqrt(c.c4 / c.c3);
    c.c6 = config.pi_coeff ? *config.pi_coeff : 1.0 / c.c5;
  } else if (config.pi_coeff) {
    c.c6 = *config.pi_coeff;
  } else {
    throw SynthesisError("design-constants",
                         "c6 undetermined: supply pi_coeff or known_stabilizer");
  }
  return c;
}

SphereConstants EstimateConstants(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                                  const LieDerivatives& lie, const ScalarFn& phi,
                                  const ScalarFn& alpha_s, const ScalarFn& R,
                                  const PowerKInfinity& gamma, SphereConstants c,
                                  const SynthesisConfig& config) {
  const HomogeneousNorm norm = NormFor(sys, lyap);
  const ScalarFn lftv = AuxLieDerivative(lie, gamma);
  const double th2 = sys.theta * sys.theta;

  c.c1 = Optimize(
             "c1",
             [&](const Vec& x) { return -(lftv(x) + lie.LG1V(x) * 0.5 * alpha_s(x)); }, norm,
             OptimizeMode::kMin, config, {}, c)
             .value;
  if (!(c.c1 > 0.0)) {
    throw SynthesisError("constants",
                         "Sontag law does not stabilize the auxiliary system (c1 = " +
                             std::to_string(c.c1) + ")");
  }
  if (!c.c1_h) {
    c.c3 = c.c1 / 2.0;
    c.c4 = 2.0 * c.c2 * c.c2 / c.c1;
    c.c5 = std::sqrt(c.c4 / c.c3);
  }
  c.c7 = std::pow(1.0 / c.c8, 1.0 / sys.kr0());

  ScalarFn stabilizer;
  if (config.known_stabilizer) {
    const Expr ah = *config.known_stabilizer;
    stabilizer = [ah](const Vec& x) { return ah.Eval(x); };
  } else {
    stabilizer = [alpha_s](const Vec& x) { return 0.5 * alpha_s(x); };
  }
  const PointPredicate nonneg_phi = [&](const Vec& x) { return phi(x) >= 0.0; };
  try {
    const SphereOptimum num = SphereOptimize([&](const Vec& x) { return std::abs(stabilizer(x)); },
                                             norm, OptimizeMode::kMax, config.budget, config.seed,
                                             nonneg_phi);
    const SphereOptimum den = SphereOptimize([&](const Vec& x) { return std::abs(lie.LG1V(x)); },
                                             norm, OptimizeMode::kMin, config.budget, config.seed,
                                             nonneg_phi);
    c.c9 = den.value > 0.0 ? num.value / den.value : std::numeric_limits<double>::infinity();
    c.argpoints["c9_num"] = num.argpoint;
    c.argpoints["c9_den"] = den.argpoint;
    c.n_evals += num.n_evals + den.n_evals;
  } catch (const DomainError&) {
    c.c9 = 0.0;
  }

  const Predicate q0 = config.q0;
  const PointPredicate in_q0 = [q0](const Vec& x) { return q0.Eval(x); };
  const PointPredicate out_q0 = [q0](const Vec& x) { return !q0.Eval(x); };
  auto hrh = [&](const Vec& x) { return SquaredNorm(sys.H(x)) * R(x); };

  c.rho1 = Optimize("rho1", [&](const Vec& x) { return -lftv(x); }, norm, OptimizeMode::kMin,
                    config, in_q0, c)
               .value;
  c.rho2 = Optimize("rho2", hrh, norm, OptimizeMode::kMax, config, in_q0, c).value;
  c.rho3 = Optimize(
               "rho3",
               [&](const Vec& x) {
                 const double lg = lie.LG1V(x);
                 return lg * lg / R(x);
               },
               norm, OptimizeMode::kMin, config, out_q0, c)
               .value;
  c.rho4 = Optimize("rho4", hrh, norm, OptimizeMode::kMax, config, out_q0, c).value;
  c.rho = Optimize("rho", lftv, norm, OptimizeMode::kMax, config, out_q0, c).value;
  c.rho_m = Optimize("rho_m", R, norm, OptimizeMode::kMin, config, {}, c).value;

  if (!(c.rho1 > 0.0)) {
    throw SynthesisError("constants", "rho1 = " + std::to_string(c.rho1) +
                                          " <= 0: Q0 invalid, cl(Q0) is not inside {L_f~V < 0}");
  }
  if (!(c.rho3 > 0.0)) {
    throw SynthesisError("constants", "rho3 = " + std::to_string(c.rho3) +
                                          " <= 0: Q0 invalid, L_G1V vanishes outside Q0");
  }
  c.kappa_c = c.rho2 / c.rho1;
  c.kappa1 = th2 * (c.rho + std::sqrt(c.rho * c.rho + 2.0 * c.rho3 * c.rho4 / th2)) / c.rho3;
  return c;
}

Q0Report ValidateQ0(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                    const LieDerivatives& lie, const PowerKInfinity& gamma, const Predicate& q0,
                    int samples, std::uint64_t seed) {
  Q0Report r;
  const ScalarFn lftv = AuxLieDerivative(lie, gamma);
  const auto pts = SphereSample(NormFor(sys, lyap), samples, seed);
  r.samples = static_cast<int>(pts.size());
  for (const SpherePoint& p : pts) {
    const bool inside = q0.Eval(p.coords);
    if (std::abs(lie.LG1V(p.coords)) <= 1e-6 && !inside) r.zero_set_violations.push_back(p.coords);
    if (inside && !(lftv(p.coords) < 0.0)) r.decrease_violations.push_back(p.coords);
  }
  r.pass = r.zero_set_violations.empty() && r.decrease_violations.empty();
  return r;
}

double SelectKappa(const SphereConstants& c, double margin) {
  if (!std::isfinite(c.kappa_c) || !std::isfinite(c.kappa1) || !std::isfinite(margin)) {
    throw DomainError("non-finite constants in kappa selection");
  }
  return std::max({c.kappa_c, c.kappa1, 1.0}) * (1.0 + margin);
}

ScalarFn BuildHKappa(const HomogeneousSystem& sys, const LieDerivatives& lie,
                     const ScalarFn& lftv, const ScalarFn& alpha, const ScalarFn& R,
                     double kappa) {
  return [sys, lie, lftv, alpha, R, kappa](const Vec& x) {
    if (x.isZero(0.0)) return 0.0;
    return -kappa * (lftv(x) + lie.LG1V(x) * alpha(x)) - SquaredNorm(sys.H(x)) * R(x);
  };
}

StatePenalty BuildStatePenalty(const HomogeneousSystem& sys, const LieDerivatives& lie,
                               const ScalarFn& lftv, const ScalarFn& alpha, const ScalarFn& R,
                               double kappa, double beta, double lambda,
                               const PowerKInfinity& gamma) {
  const PowerKInfinity ell = LfTransform(gamma);
  ScalarFn l_bar = [lie, lftv, alpha, beta, lambda, ell](const Vec& x) {
    if (x.isZero(0.0)) return 0.0;
    const double la = lie.LG1V(x) * alpha(x);
    return -2.0 * beta * (lftv(x) + la) + beta * (2.0 - lambda) * ell(2.0 * lie.LG2V(x).norm()) -
           beta * (beta - 2.0) * la;
  };
  ScalarFn l = [sys, l_bar, R, kappa](const Vec& x) {
    if (x.isZero(0.0)) return 0.0;
    return l_bar(x) - SquaredNorm(sys.H(x)) * R(x) / kappa;
  };
  return {l, l_bar};
}

// ---------------------------------------------------------------------------
// Closed forms

namespace {

std::optional<Rational> ToRational(double v) {
  for (std::int64_t den = 1; den <= 1000; ++den) {
    const double num = std::round(v * static_cast<double>(den));
    if (std::abs(num / static_cast<double>(den) - v) <= 1e-12 * std::max(1.0, std::abs(v))) {
      return Rational(static_cast<std::int64_t>(num), den);
    }
  }
  return std::nullopt;
}

Expr Scale(double c, const Expr& e) {
  if (c == 0.0) return Expr::Constant(0.0);
  if (c == 1.0) return e;
  return Expr::Constant(c) * e;
}

Expr SumSquares(const std::vector<Expr>& es) {
  Expr sum = Expr::Pow(es.front(), Rational(2));
  for (std::size_t i = 1; i < es.size(); ++i) sum = sum + Expr::Pow(es[i], Rational(2));
  return sum;
}

std::map<std::string, std::string> ClosedForms(const SynthesizedController& s) {
  std::map<std::string, std::string> out;
  const HomogeneousSystem& sys = s.system;
  const auto kr0 = ToRational(sys.kr0());
  const auto inv_nu = ToRational(1.0 / s.norm.nu());
  std::vector<Rational> powers;
  for (double r : sys.dilation.weights()) {
    const auto q = ToRational(s.norm.nu() / r);
    if (!q) return {};
    powers.push_back(*q);
  }
  if (!kr0 || !inv_nu) return {};

  const LieDerivatives& lie = *s.lie;
  Expr gsum = Expr::APow(Expr::Var(0), powers[0]);
  for (int i = 1; i < sys.n; ++i) gsum = gsum + Expr::APow(Expr::Var(i), powers[i]);
  const Expr gamma_kr0 = Expr::Pow(Expr::Pow(gsum, *inv_nu), *kr0);

  const Expr L = lie.LG1V_expr();
  const Expr lg2_sq = SumSquares(lie.LG2V_expr());
  const Expr lg2_abs = sys.xi == 1 ? Expr::Abs(lie.LG2V_expr().front()) : Expr::Sqrt(lg2_sq);
  const Expr phi = lie.LfV_expr() + Scale(s.constants.c6, lg2_abs * gamma_kr0);
  const Expr root = Expr::Sqrt(Expr::Pow(phi, Rational(2)) + Expr::Pow(L, Rational(4)));
  const Expr gap = root - phi;
  const Expr alpha_s = -(Scale(s.c10, L) + Expr::Pow(L, Rational(3)) / gap);
  const Expr alpha = Scale(s.kappa / 2.0, alpha_s);
  const Expr alpha_star = Scale(s.beta, alpha);
  const double th2 = sys.theta * sys.theta;
  const Expr R = gap / Scale(th2, Scale(s.c10, gap) + Expr::Pow(L, Rational(2)));
  // l_gamma(2|b|) = 4 a' |b|^2 for quadratic gamma.
  const PowerKInfinity ell = LfTransform(s.gamma);
  const Expr ell2 = Scale(4.0 * ell.a(), lg2_sq);
  const Expr lftv = lie.LfV_expr() + ell2;
  const Expr la = L * alpha;
  Expr hh = Expr::Constant(0.0);
  bool any_h = false;
  for (const Expr& h : sys.h) {
    if (h.is_zero()) continue;
    hh = any_h ? hh + Expr::Pow(h, Rational(2)) : Expr::Pow(h, Rational(2));
    any_h = true;
  }
  const Expr hrh = any_h ? hh * R : Expr::Constant(0.0);
  Expr l_bar = Scale(-2.0 * s.beta, lftv + la);
  if (s.lambda != 2.0) l_bar = l_bar + Scale(s.beta * (2.0 - s.lambda), ell2);
  if (s.beta != 2.0) l_bar = l_bar - Scale(s.beta * (s.beta - 2.0), la);
  const Expr l = any_h ? l_bar - Scale(1.0 / s.kappa, hrh) : l_bar;
  Expr H = Scale(-s.kappa, lftv + la);
  if (any_h) H = H - hrh;

  out["phi"] = phi.ToString();
  out["alpha_s"] = alpha_s.ToString();
  out["alpha"] = alpha.ToString();
  out["alpha_star"] = alpha_star.ToString();
  out["R"] = R.ToString();
  out["R1"] = Scale(th2 / s.kappa, R).ToString();
  out["R2"] = Scale(1.0 / s.kappa, R).ToString();
  out["E"] = Scale(2.0 * s.beta, s.lyapunov.V).ToString();
  out["l_bar"] = l_bar.ToString();
  out["l"] = l.ToString();
  out["H_kappa"] = H.ToString();
  return out;
}

std::string PointList(const std::vector<Vec>& pts) {
  std::ostringstream os;
  for (std::size_t i = 0; i < std::min<std::size_t>(pts.size(), 5); ++i) {
    os << (i ? ", " : "") << FormatPoint(pts[i]);
  }
  if (pts.size() > 5) os << ", ... (" << pts.size() << " total)";
  return os.str();
}

template <typename F>
auto Stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SynthesisError&) {
    throw;
  } catch (const Error& e) {
    throw SynthesisError(stage, e.what());
  }
}

}  // namespace

SynthesizedController Synthesize(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                                 const SynthesisConfig& config) {
  Stage("config", [&] {
    config.Validate();
    return 0;
  });
  if (!(sys.theta > 0.0)) throw SynthesisError("precondition", "non-synthesizable: theta=0");
  if (sys.xi < 1) throw SynthesisError("precondition", "system has no disturbance channel");

  Stage("validate", [&] {
    const ValidationReport report = ValidateSystem(sys, lyap, 64, 1e-8, config.seed);
    for (const auto& c : report.checks) {
      if (!c.pass) throw SynthesisError("validate", c.name + " failed: " + c.detail);
    }
    return 0;
  });

  SynthesizedController s;
  s.system = sys;
  s.lyapunov = lyap;
  s.lie = std::make_shared<const LieDerivatives>(sys, lyap);
  s.norm = NormFor(sys, lyap);
  s.c10 = config.c10;
  s.beta = config.beta;
  s.lambda = config.lambda;
  const LieDerivatives& lie = *s.lie;
  const int samples = config.budget.samples > 0 ? config.budget.samples
                                                : DefaultSphereSamples(sys.n);

  SphereConstants design =
      Stage("design-constants", [&] { return EstimateDesignConstants(sys, lyap, lie, config); });

  s.phi = BuildPhi(sys, lyap, lie, design.c6);
  Stage("sontag", [&] {
    const auto bad = CheckSontagCondition(sys, lyap, lie, s.phi, samples, config.seed);
    if (!bad.empty()) {
      std::vector<Vec> pts;
      for (const auto& v : bad) pts.push_back(v.point);
      throw SynthesisError("sontag", "phi >= 0 where L_G1V = 0 at " + PointList(pts));
    }
    return 0;
  });
  s.alpha_s = SontagController(sys, lyap, lie, s.phi, config.c10);
  s.R = BuildR(sys, lyap, lie, s.phi, config.c10);
  s.gamma = Stage("gamma", [&] { return BuildGamma(design.c6, design.c8); });
  if (!CheckScaling(s.gamma)) throw SynthesisError("gamma", "scaling condition fails");
  s.f_tilde = BuildAuxField(sys, lie, s.gamma);
  s.lftv = AuxLieDerivative(lie, s.gamma);

  Stage("q0", [&] {
    const Q0Report q = ValidateQ0(sys, lyap, lie, s.gamma, config.q0, samples, config.seed);
    if (!q.zero_set_violations.empty()) {
      throw SynthesisError("q0", "points with L_G1V = 0 outside Q0: " +
                                     PointList(q.zero_set_violations));
    }
    if (!q.decrease_violations.empty()) {
      throw SynthesisError("q0", "points of Q0 with L_f~V >= 0: " +
                                     PointList(q.decrease_violations));
    }
    return 0;
  });

  s.constants = Stage("constants", [&] {
    return EstimateConstants(sys, lyap, lie, s.phi, s.alpha_s, s.R, s.gamma, design, config);
  });
  s.kappa_selected = Stage("kappa", [&] { return SelectKappa(s.constants, config.kappa_margin); });
  s.kappa = config.kappa ? *config.kappa : s.kappa_selected;

  const double kappa = s.kappa;
  const double beta = s.beta;
  const double th2 = sys.theta * sys.theta;
  const ScalarFn alpha_s = s.alpha_s;
  const ScalarFn R = s.R;
  const ScalarFn phi = s.phi;
  s.alpha = [alpha_s, kappa](const Vec& x) { return 0.5 * kappa * alpha_s(x); };
  const ScalarFn alpha = s.alpha;
  s.alpha_star = [alpha, beta](const Vec& x) { return beta * alpha(x); };
  s.H_kappa = BuildHKappa(sys, lie, s.lftv, s.alpha, s.R, kappa);
  const StatePenalty pen =
      BuildStatePenalty(sys, lie, s.lftv, s.alpha, s.R, kappa, beta, s.lambda, s.gamma);
  s.l = pen.l;
  s.l_bar = pen.l_bar;
  const LieDerivatives lie_copy = lie;
  s.E = [lie_copy, beta](const Vec& x) { return 2.0 * beta * lie_copy.V(x); };
  s.R1 = [R, th2, kappa](const Vec& x) { return th2 * R(x) / kappa; };
  s.R2 = [R, kappa](const Vec& x) { return R(x) / kappa; };
  s.gamma0 = PowerKInfinity(beta * std::pow(s.lambda, 1.0 - s.gamma.p()) * s.gamma.a(),
                            s.gamma.p());
  const double c10 = s.c10;
  s.M = [lie_copy, phi](const Vec& x) {
    if (x.isZero(0.0)) return 0.0;
    const double p = phi(x);
    const double l2 = std::pow(lie_copy.LG1V(x), 2);
    return 0.5 * (std::hypot(p, l2) - p);
  };
  s.M1 = [lie_copy, phi, kappa, c10](const Vec& x) {
    if (x.isZero(0.0)) return 0.0;
    const double p = phi(x);
    const double l2 = std::pow(lie_copy.LG1V(x), 2);
    return 0.5 * (kappa - 1.0) * (p + std::hypot(p, l2)) + 0.5 * kappa * c10 * l2;
  };

  // Auxiliary-system decrease at the sampled sphere.
  Stage("decrease", [&] {
    double worst = std::numeric_limits<double>::infinity();
    Vec where;
    for (const SpherePoint& p : SphereSample(s.norm, samples, config.seed)) {
      const double dec = -(s.lftv(p.coords) + lie.LG1V(p.coords) * s.alpha(p.coords));
      if (dec < worst) {
        worst = dec;
        where = p.coords;
      }
    }
    s.min_aux_decrease = worst;
    if (worst < s.constants.c1 * (1.0 - 1e-6)) {
      throw SynthesisError("decrease", "L_f~V + L_G1V alpha > -c1 at " + FormatPoint(where));
    }
    return 0;
  });

  if (config.kappa) {
    Stage("kappa", [&] {
      const SphereOptimum h = SphereOptimize(s.H_kappa, s.norm, OptimizeMode::kMin,
                                             config.budget, config.seed);
      if (!(h.value > 0.0)) {
        throw SynthesisError("kappa", "H_kappa is not positive on the sphere for kappa = " +
                                          std::to_string(kappa) + " (min " +
                                          std::to_string(h.value) + " at " +
                                          FormatPoint(h.argpoint) + ")");
      }
      return 0;
    });
  }

  s.expressions = ClosedForms(s);
  return s;
}

CostPieces CostFromController(const SynthesizedController& s) {
  return {s.E, s.l, s.R1, s.R2, s.gamma0};
}

CostPieces CostFromFixture(const FixtureCost& cost) {
  auto wrap = [](const Expr& e) -> ScalarFn { return [e](const Vec& x) { return e.Eval(x); }; };
  return {wrap(cost.E), wrap(cost.l), wrap(cost.R1), wrap(cost.R2), cost.gamma0};
}

}  // namespace homopt
