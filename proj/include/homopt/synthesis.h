#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "homopt/expr.h"
#include "homopt/homogeneity.h"
#include "homopt/lft.h"
#include "homopt/sysdef.h"

namespace homopt {

struct SynthesisConfig {
  double c10 = 1.0;
  /// c6 in pi(s) = c6 s^{k+r0}; defaults to 1/c5 when a known stabilizer is
  /// given.
  std::optional<double> pi_coeff;
  Predicate q0;
  double beta = 2.0;
  double lambda = 2.0;
  double kappa_margin = 0.043;
  /// Explicit gain; accepted only if H_kappa passes the sampled
  /// positivity certificate.
  std::optional<double> kappa;
  std::optional<Expr> known_stabilizer;
  SphereBudget budget;
  std::uint64_t seed = 42;

  /// Throws DomainError unless beta >= 2, 0 < lambda <= 2, c10 > 0.
  void Validate() const;
};

SynthesisConfig ConfigFromFixture(const ExampleFixture& fx);

struct SphereConstants {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0, c7 = 0, c8 = 0, c9 = 0;
  std::optional<double> c1_h;
  double rho1 = 0, rho2 = 0, rho3 = 0, rho4 = 0, rho = 0, rho_m = 0;
  double kappa_c = 0, kappa1 = 0;
  std::map<std::string, Vec> argpoints;
  long n_evals = 0;
};

/// Relative threshold below which L_G1 V counts as zero: 1e-9 Gamma^{k+r0}.
inline constexpr double kSwitchTol = 1e-9;

ScalarFn BuildPhi(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                  const LieDerivatives& lie, double c6);

/// Sontag-type law alpha_s = -[c10 + (phi + sqrt(phi^2 + L^4)) / L^2] L with
/// L = L_G1 V, and 0 where L vanishes.
ScalarFn SontagController(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                          const LieDerivatives& lie, const ScalarFn& phi, double c10);

/// R = theta^{-2} [c10 + (phi + sqrt(phi^2 + L^4)) / L^2]^{-1}, or
/// 1 / (theta^2 c10) where L vanishes.
ScalarFn BuildR(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                const LieDerivatives& lie, const ScalarFn& phi, double c10);

/// gamma(s) = (c8 / c6) s^2.
PowerKInfinity BuildGamma(double c6, double c8);

/// f~ = f + G2 l_gamma(2|L_G2 V|) L_G2 V^T / |L_G2 V|^2, equal to f where
/// L_G2 V vanishes.
VectorFn BuildAuxField(const HomogeneousSystem& sys, const LieDerivatives& lie,
                       const PowerKInfinity& gamma);

/// L_f~ V = L_f V + l_gamma(2 |L_G2 V|).
ScalarFn AuxLieDerivative(const LieDerivatives& lie, const PowerKInfinity& gamma);

struct SontagViolation {
  Vec point;
  double phi = 0.0;
  double lg1v = 0.0;
};

/// Sphere samples with |L_G1 V| <= 1e-6 at which phi > -1e-9.
std::vector<SontagViolation> CheckSontagCondition(const HomogeneousSystem& sys,
                                                  const LyapunovCandidate& lyap,
                                                  const LieDerivatives& lie, const ScalarFn& phi,
                                                  int samples, std::uint64_t seed);

/// c2 = c8 = max_S |L_G2 V|, and c1_h, c3..c6 when a known stabilizer or
/// pi coefficient determines them.
SphereConstants EstimateDesignConstants(const HomogeneousSystem& sys,
                                        const LyapunovCandidate& lyap, const LieDerivatives& lie,
                                        const SynthesisConfig& config);

/// Completes `design` with c1, c3..c5 (if not fixed by c1_h), c7, c9 and the
/// Q0-based rho constants, kappa_c and kappa_1. Throws SynthesisError when
/// rho1 <= 0 or rho3 <= 0.
SphereConstants EstimateConstants(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                                  const LieDerivatives& lie, const ScalarFn& phi,
                                  const ScalarFn& alpha_s, const ScalarFn& R,
                                  const PowerKInfinity& gamma, SphereConstants design,
                                  const SynthesisConfig& config);

struct Q0Report {
  bool pass = true;
  /// Points with L_G1 V ~ 0 outside Q0.
  std::vector<Vec> zero_set_violations;
  /// Points of Q0 where L_f~ V >= 0.
  std::vector<Vec> decrease_violations;
  int samples = 0;
};

Q0Report ValidateQ0(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                    const LieDerivatives& lie, const PowerKInfinity& gamma, const Predicate& q0,
                    int samples, std::uint64_t seed);

/// max(kappa_c, kappa_1, 1) (1 + margin).
double SelectKappa(const SphereConstants& constants, double margin);

ScalarFn BuildHKappa(const HomogeneousSystem& sys, const LieDerivatives& lie,
                     const ScalarFn& lftv, const ScalarFn& alpha, const ScalarFn& R, double kappa);

struct StatePenalty {
  ScalarFn l;
  ScalarFn l_bar;
};

StatePenalty BuildStatePenalty(const HomogeneousSystem& sys, const LieDerivatives& lie,
                               const ScalarFn& lftv, const ScalarFn& alpha, const ScalarFn& R,
                               double kappa, double beta, double lambda,
                               const PowerKInfinity& gamma);

struct SynthesizedController {
  HomogeneousSystem system;
  LyapunovCandidate lyapunov;
  std::shared_ptr<const LieDerivatives> lie;
  HomogeneousNorm norm{Dilation({1.0}), 2.0};

  double c10 = 1.0;
  double kappa = 1.0;
  double kappa_selected = 1.0;  // value SelectKappa proposed
  double beta = 2.0;
  double lambda = 2.0;
  PowerKInfinity gamma{1.0, 2.0};
  PowerKInfinity gamma0{1.0, 2.0};
  SphereConstants constants;

  ScalarFn phi;
  ScalarFn alpha_s;
  ScalarFn alpha;
  ScalarFn alpha_star;
  ScalarFn R;
  VectorFn f_tilde;
  ScalarFn lftv;  // L_f~ V
  ScalarFn H_kappa;
  ScalarFn E;
  ScalarFn l;
  ScalarFn l_bar;
  ScalarFn R1;
  ScalarFn R2;
  ScalarFn M;
  ScalarFn M1;

  /// Printable closed forms (alpha_star, alpha, R, phi, E, R1, R2, l,
  /// l_bar, H_kappa) when the dilation and norm exponents are rational.
  std::map<std::string, std::string> expressions;
  double min_aux_decrease = 0.0;  // min_S -(L_f~ V + L_G1 V alpha)
};

/// Cost functional ingredients: terminal E, state penalty l, control and
/// output weights R1, R2 and the disturbance penalty gamma0.
struct CostPieces {
  ScalarFn E;
  ScalarFn l;
  ScalarFn R1;
  ScalarFn R2;
  PowerKInfinity gamma0{1.0, 2.0};
};

CostPieces CostFromController(const SynthesizedController& s);
CostPieces CostFromFixture(const FixtureCost& cost);

/// Full pipeline. Errors are SynthesisError tagged with the failing stage.
SynthesizedController Synthesize(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                                 const SynthesisConfig& config);

}  // namespace homopt
