#include "homopt/verify.h"

#include <cmath>
#include <limits>
#include <random>

#include "homopt/errors.h"
#include "homopt/lft.h"

namespace homopt {

VerificationReport CheckPdOnSphere(const std::string& name, const ScalarFn& fn,
                                   const HomogeneousNorm& norm, double degree,
                                   const SphereBudget& budget, std::uint64_t seed) {
  if (!(degree > 0.0)) throw DomainError(name + ": positive-definiteness needs a positive degree");
  HomogeneityOptions opt;
  opt.tol = 1e-6;
  opt.seed = seed;
  const HomogeneityReport h = CheckHomogeneous(fn, degree, norm.dilation(), opt);
  if (!h.pass) {
    throw DomainError(name + " is not homogeneous of degree " + std::to_string(degree) +
                      " (relative error " + std::to_string(h.max_rel_error) + " at " +
                      FormatPoint(h.worst_point) + ")");
  }
  const SphereOptimum best = SphereOptimize(fn, norm, OptimizeMode::kMin, budget, seed);
  VerificationReport r;
  r.name = name;
  r.extremal_value = best.value;
  r.extremal_point = best.argpoint;
  r.pass = best.value > 0.0;
  r.tolerance = 0.0;
  r.budget = best.n_evals;
  if (!r.pass) r.detail = "nonpositive at " + FormatPoint(best.argpoint);
  return r;
}

namespace {

struct Sample {
  Vec x;
  Vec w;
};

// Sphere points dilated to a range of scales, with random disturbances of
// matching magnitude.
template <typename Visit>
void ForEachSample(const SynthesizedController& s, const DissipationSampling& plan,
                   Visit&& visit) {
  const auto sphere = SphereSample(s.norm, plan.samples, plan.seed);
  std::mt19937_64 rng(plan.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> log_eps(std::log(plan.eps_lo), std::log(plan.eps_hi));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double kr0 = s.system.kr0();
  for (const SpherePoint& p : sphere) {
    const double eps = std::exp(log_eps(rng));
    Vec x = s.norm.dilation().Apply(eps, p.coords);
    Vec w(s.system.xi);
    for (int j = 0; j < s.system.xi; ++j) w[j] = plan.w_scale * unit(rng) * std::pow(eps, kr0);
    visit(x, w);
    // Worst case for V' - gamma(|w|/2): w = 2 (gamma')^{-1}(2|b|) b/|b|.
    const Vec b = s.lie->LG2V(x);
    const double nb = b.norm();
    if (nb > 0.0) visit(x, Vec(b * (2.0 * s.gamma.InverseDerivative(2.0 * nb) / nb)));
  }
}

void Track(VerificationReport& r, double slack, const Vec& x, double tol) {
  if (slack < r.extremal_value) {
    r.extremal_value = slack;
    r.extremal_point = x;
  }
  if (slack < -tol) r.pass = false;
}

}  // namespace

VerificationReport CheckIssDissipation(const SynthesizedController& s,
                                       const DissipationSampling& plan) {
  VerificationReport r;
  r.name = "ISS dissipation";
  r.pass = true;
  r.extremal_value = std::numeric_limits<double>::infinity();
  r.tolerance = plan.rel_tol;
  const double c1 = s.constants.c1;
  const double kr0 = s.system.kr0();
  long count = 0;
  ForEachSample(s, plan, [&](const Vec& x, const Vec& w) {
    const double vdot = s.lie->LfV(x) + s.lie->LG1V(x) * s.alpha_star(x) + s.lie->LG2V(x).dot(w);
    const double scale = std::pow(s.norm(x), 2.0 * kr0);
    const double rhs = -c1 * (1.0 - plan.rel_tol) * scale + s.gamma(w.norm() / 2.0);
    // Normalized slack so the tolerance is relative to Gamma^{2(k+r0)}.
    Track(r, (rhs - vdot) / std::max(scale, 1e-300), x, plan.abs_tol);
    ++count;
  });
  r.budget = count;
  if (!r.pass) r.detail = "violated at " + FormatPoint(r.extremal_point);
  return r;
}

double KappaL(const SynthesizedController& s) {
  if (!s.gamma.IsQuadratic()) throw DomainError("kappa_L needs gamma(s) = s^2/mu");
  const double mu = 1.0 / s.gamma.a();
  return std::sqrt(s.kappa * s.beta / (4.0 * s.constants.rho_m * mu));
}

double C0(const SynthesizedController& s, const Vec& x0) {
  return std::sqrt(s.kappa * s.beta * s.lie->V(x0) / s.constants.rho_m);
}

VerificationReport CheckIosDissipation(const SynthesizedController& s,
                                       const DissipationSampling& plan,
                                       const std::optional<Vec>& x0) {
  VerificationReport r;
  r.name = "IOS dissipation";
  r.pass = true;
  r.extremal_value = std::numeric_limits<double>::infinity();
  r.tolerance = 1e-9;
  const double kr0 = s.system.kr0();
  long count = 0;
  ForEachSample(s, plan, [&](const Vec& x, const Vec& w) {
    const double u = s.alpha_star(x);
    const double vdot = s.lie->LfV(x) + s.lie->LG1V(x) * u + s.lie->LG2V(x).dot(w);
    const Vec y = s.system.Output(x, u);
    const double lhs = s.kappa * vdot + y.squaredNorm() * s.R(x) / s.beta;
    const double rhs = -s.H_kappa(x) + s.kappa * s.gamma(w.norm() / 2.0);
    const double scale = std::pow(s.norm(x), 2.0 * kr0);
    Track(r, (rhs - lhs) / std::max(scale, 1e-300), x, 1e-9);
    ++count;
  });
  r.budget = count;
  if (!r.pass) r.detail = "violated at " + FormatPoint(r.extremal_point);
  if (s.gamma.IsQuadratic()) {
    r.extras.emplace_back("mu", 1.0 / s.gamma.a());
    r.extras.emplace_back("rho_m", s.constants.rho_m);
    r.extras.emplace_back("kappa_L", KappaL(s));
    if (x0) r.extras.emplace_back("c0", C0(s, *x0));
  } else {
    r.detail += (r.detail.empty() ? "" : "; ") + std::string("gamma not quadratic, no kappa_L");
  }
  return r;
}

VerificationReport CheckInequalityOnBox(const std::string& name,
                                        const std::function<double(const Vec&, const Vec&)>& slack,
                                        int n, int xi, double x_lo, double x_hi, double w_lo,
                                        double w_hi, int samples, std::uint64_t seed,
                                        double tol) {
  VerificationReport r;
  r.name = name;
  r.pass = true;
  r.extremal_value = std::numeric_limits<double>::infinity();
  r.tolerance = tol;
  r.budget = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(x_lo, x_hi);
  std::uniform_real_distribution<double> uw(w_lo, w_hi);
  long violations = 0;
  for (int i = 0; i < samples; ++i) {
    Vec x(n), w(xi);
    for (int j = 0; j < n; ++j) x[j] = ux(rng);
    for (int j = 0; j < xi; ++j) w[j] = uw(rng);
    const double v = slack(x, w);
    if (v < r.extremal_value) {
      r.extremal_value = v;
      r.extremal_point = x;
    }
    if (v < -tol) ++violations;
  }
  r.pass = violations == 0;
  if (violations) r.detail = std::to_string(violations) + " violations";
  return r;
}

std::vector<double> HjiResidual(const HomogeneousSystem& sys, const LieDerivatives& lie,
                                const CostPieces& cost, const std::vector<Vec>& points) {
  const PowerKInfinity ell0 = LfTransform(cost.gamma0);
  std::vector<double> out;
  out.reserve(points.size());
  for (const Vec& x : points) {
    if (x.isZero(0.0)) {
      out.push_back(0.0);
      continue;
    }
    const double lg = lie.LG1V(x);
    out.push_back(lie.LfV(x) + cost.l(x) - lg * lg / (8.0 * cost.R1(x)) +
                  sys.H(x).squaredNorm() * cost.R2(x) + ell0(lie.LG2V(x).norm()));
  }
  return out;
}

std::vector<GainMarginResult> GainMarginSweep(const HomogeneousSystem& sys,
                                              const LieDerivatives& lie,
                                              const ScalarFn& alpha_star, double beta,
                                              const std::vector<double>& gains,
                                              const HomogeneousNorm& norm,
                                              const SphereBudget& budget, std::uint64_t seed) {
  (void)sys;
  std::vector<GainMarginResult> out;
  for (double g : gains) {
    if (!(g > 0.0)) throw DomainError("gains must be positive");
    const SphereOptimum best = SphereOptimize(
        [&](const Vec& x) { return -(lie.LfV(x) + g * lie.LG1V(x) * alpha_star(x)); }, norm,
        OptimizeMode::kMin, budget, seed);
    GainMarginResult r;
    r.gain = g;
    r.min_decrease = best.value;
    r.argpoint = best.argpoint;
    r.asserted = g > 1.0 / beta;
    r.pass = !r.asserted || best.value > 0.0;
    out.push_back(r);
  }
  return out;
}

}  // namespace homopt
