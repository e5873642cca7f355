#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "homopt/expr.h"
#include "homopt/homogeneity.h"
#include "homopt/lft.h"
#include "homopt/synthesis.h"
#include "homopt/sysdef.h"
#include "homopt/verify.h"

namespace homopt {

/// w*(x) = lambda (gamma')^{-1}(2|L_G2 V|) L_G2 V / |L_G2 V|, 0 where L_G2 V = 0.
Vec WorstCaseW(const LieDerivatives& lie, const PowerKInfinity& gamma, double lambda,
               const Vec& x);

/// beta (2 L_G2 V w - lambda l_gamma(2|L_G2 V|) - lambda gamma(|w|/lambda)) <= 0,
/// with equality at w*.
double DeltaW(const LieDerivatives& lie, const PowerKInfinity& gamma, double lambda, double beta,
              const Vec& x, const Vec& w);

struct DisturbanceSpec {
  enum class Kind { kZero, kConstant, kSinusoid, kWorstCase, kCustom };
  Kind kind = Kind::kZero;
  Vec value;  // constant value or sinusoid amplitude
  double omega = 0.0;
  double phase = 0.0;
  double decay = 0.0;  // sinusoid envelope exp(-decay t)
  double lambda = 2.0;
  PowerKInfinity gamma{1.0, 2.0};
  std::shared_ptr<const LieDerivatives> lie;
  std::vector<Expr> custom;  // one expression per channel, in x1..xn and t

  static DisturbanceSpec Zero();
  static DisturbanceSpec Constant(Vec value);
  static DisturbanceSpec Sinusoid(Vec amplitude, double omega, double phase = 0.0,
                                  double decay = 0.0);
  static DisturbanceSpec WorstCase(std::shared_ptr<const LieDerivatives> lie,
                                   PowerKInfinity gamma, double lambda);
  static DisturbanceSpec Custom(std::vector<Expr> channels);

  /// w(t, x) with xi channels.
  Vec operator()(double t, const Vec& x, int xi) const;
  std::string Describe() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> u;
  std::vector<Vec> w;
  std::vector<Vec> y;
  std::vector<double> V_vals;
  bool terminated_at_origin = false;
  double origin_time = 0.0;
  long rk_steps = 0;
};

struct IntegrateOptions {
  double tol = 1e-9;
  double origin_eps = 1e-9;
  int substeps = 4;      // dense-output nodes per accepted step
  int min_steps = 250;   // max step is T / min_steps
};

/// Closed loop x' = f + G1 u(x) + G2 w(t, x) by adaptive Dormand-Prince 5(4)
/// with dense output. States with Gamma(x) < origin_eps are clamped to 0
/// for the rest of the horizon. `value_fn` fills V_vals when given.
Trajectory Integrate(const HomogeneousSystem& sys, const ScalarFn& controller,
                     const DisturbanceSpec& dist, const Vec& x0, double T,
                     const IntegrateOptions& options = {}, const ScalarFn& value_fn = {});

struct CostBreakdown {
  double horizon = 0.0;
  double terminal = 0.0;    // E(x(T))
  double int_l = 0.0;
  double int_uR1u = 0.0;
  double int_yR2y = 0.0;
  double int_gamma0 = 0.0;  // integral of gamma0(|w|)
  double int_y2 = 0.0;      // integral of |y|^2
  double int_w2 = 0.0;      // integral of |w|^2
  double J = 0.0;
  /// E(x(t_i)) + integral over [0, t_i], one entry per node.
  std::vector<double> running_J;
};

/// Composite Simpson weights on a nonuniform grid; an odd trailing interval
/// uses the matching partial-pair rule.
double Simpson(const std::vector<double>& t, const std::vector<double>& f);
/// Cumulative version: value of the integral over [t_0, t_i] for every i.
std::vector<double> CumulativeSimpson(const std::vector<double>& t, const std::vector<double>& f);

/// Throws DomainError if T exceeds the trajectory; T <= 0 selects its end.
CostBreakdown EvaluateCost(const Trajectory& traj, const CostPieces& cost, double T = 0.0);

struct CostIdentityCase {
  std::string label;  // e.g. "a: alpha*, w*"
  double J = 0.0;
  double target = 0.0;  // 2 beta V(x0)
  double slack = 0.0;   // signed margin on the claimed side
  bool pass = false;
};

struct CostIdentityReport {
  bool pass = false;
  double tolerance = 0.0;
  std::vector<CostIdentityCase> cases;
};

struct CostIdentityOptions {
  double rel_tol = 1e-3;  // relative to 2 beta V(x0)
  std::vector<double> gains = {0.5, 2.0};
  double sinusoid_amplitude = 1.0;
  double sinusoid_omega = 3.0;
  double sinusoid_decay = 0.1;
  IntegrateOptions integrate;
};

/// (a) alpha*, w*: J = 2 beta V(x0); (b) alpha*, w in {0, sinusoid}:
/// J <= 2 beta V(x0); (c) g alpha*, w*: J >= 2 beta V(x0).
CostIdentityReport CostIdentityCheck(const SynthesizedController& s, const Vec& x0, double T,
                                     const CostIdentityOptions& options = {});

struct L2GainReport {
  bool pass = false;
  double y_norm = 0.0;
  double w_norm = 0.0;
  double kappa_L = 0.0;
  double c0 = 0.0;
  double bound = 0.0;  // kappa_L |w|_2 + c0
};

L2GainReport L2GainCheck(const Trajectory& traj, double kappa_L, double c0, double tol = 1e-6);

/// t, x1..xn, u, w1..wxi, y1..yl, V, running_J with %.17g values.
std::string TrajectoryCsv(const Trajectory& traj, const std::vector<double>& running_J = {});

}  // namespace homopt
