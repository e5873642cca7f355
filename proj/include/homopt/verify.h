#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "homopt/homogeneity.h"
#include "homopt/synthesis.h"
#include "homopt/sysdef.h"

namespace homopt {

struct VerificationReport {
  std::string name;
  bool pass = false;
  double extremal_value = 0.0;
  Vec extremal_point;
  double tolerance = 0.0;
  long budget = 0;
  std::string detail;
  /// Derived quantities reported alongside the verdict (kappa_L, c0, ...).
  std::vector<std::pair<std::string, double>> extras;
};

/// Positivity on the homogeneous sphere, which by homogeneity certifies
/// positivity on R^n \ {0}. The function's degree is checked first; a
/// failing precheck throws DomainError.
VerificationReport CheckPdOnSphere(const std::string& name, const ScalarFn& fn,
                                   const HomogeneousNorm& norm, double degree,
                                   const SphereBudget& budget, std::uint64_t seed);

/// Sampling plan for (x, w) dissipation checks: x = Delta_eps(s) with s on
/// the sphere and eps log-uniform in [eps_lo, eps_hi]; w has entries
/// uniform in [-w_scale, w_scale] Gamma(x)^{k+r0}. The worst-case w is
/// checked at every sampled x as well.
struct DissipationSampling {
  int samples = 10000;
  double eps_lo = 0.1;
  double eps_hi = 10.0;
  double w_scale = 3.0;
  std::uint64_t seed = 42;
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
};

/// V' = L_f V + L_G1 V alpha* + L_G2 V w <= -c1 Gamma^{2(k+r0)} + gamma(|w|/2).
VerificationReport CheckIssDissipation(const SynthesizedController& s,
                                       const DissipationSampling& sampling = {});

/// kappa V' + y^T R y / beta <= -H_kappa + kappa gamma(|w|/2) with
/// y = h + d alpha*. Reports kappa_L = sqrt(kappa beta / (4 rho_m mu)) and,
/// when x0 is given, c0 = sqrt(kappa beta V(x0) / rho_m).
VerificationReport CheckIosDissipation(const SynthesizedController& s,
                                       const DissipationSampling& sampling = {},
                                       const std::optional<Vec>& x0 = std::nullopt);

double KappaL(const SynthesizedController& s);
double C0(const SynthesizedController& s, const Vec& x0);

/// Generic pointwise inequality slack(x, w) >= -tol over uniform samples of
/// the box [x_lo, x_hi]^n x [w_lo, w_hi]^xi.
VerificationReport CheckInequalityOnBox(const std::string& name,
                                        const std::function<double(const Vec&, const Vec&)>& slack,
                                        int n, int xi, double x_lo, double x_hi, double w_lo,
                                        double w_hi, int samples, std::uint64_t seed,
                                        double tol = 1e-12);

/// L_f V + l - (1/8) L_G1 V^2 / R1 + h^T R2 h + l_{gamma0}(|L_G2 V|) at each
/// point; 0 at the origin. Diagnostic only.
std::vector<double> HjiResidual(const HomogeneousSystem& sys, const LieDerivatives& lie,
                                const CostPieces& cost, const std::vector<Vec>& points);

struct GainMarginResult {
  double gain = 1.0;
  double min_decrease = 0.0;  // min_S -(L_f V + g L_G1 V alpha*)
  Vec argpoint;
  bool asserted = false;  // gain > 1/beta
  bool pass = true;       // min_decrease > 0, or not asserted
};

std::vector<GainMarginResult> GainMarginSweep(const HomogeneousSystem& sys,
                                              const LieDerivatives& lie,
                                              const ScalarFn& alpha_star, double beta,
                                              const std::vector<double>& gains,
                                              const HomogeneousNorm& norm,
                                              const SphereBudget& budget, std::uint64_t seed);

}  // namespace homopt
