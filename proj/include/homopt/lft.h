#pragma once

#include <Eigen/Core>

namespace homopt {

/// gamma(s) = a * s^p on s >= 0, a > 0, p > 1.
class PowerKInfinity {
 public:
  PowerKInfinity(double a, double p);

  double a() const { return a_; }
  double p() const { return p_; }

  double operator()(double s) const;
  double Derivative(double s) const;
  /// (gamma')^{-1}(s) = (s / (a p))^{1/(p-1)}.
  double InverseDerivative(double s) const;

  bool IsQuadratic() const;

 private:
  double a_;
  double p_;
};

/// Closed-form Legendre-Fenchel transform
/// l(s) = s (gamma')^{-1}(s) - gamma((gamma')^{-1}(s))
///      = (p-1) a^{-1/(p-1)} (s/p)^{p/(p-1)}.
PowerKInfinity LfTransform(const PowerKInfinity& g);

/// True iff l_gamma(2 eps s) = eps^2 l_gamma(2 s), i.e. p = 2. Also spot
/// checked numerically on an (eps, s) grid.
bool CheckScaling(const PowerKInfinity& g);

/// gamma(|a|) + l_gamma(|b|) - a.b, nonnegative by Young's inequality.
double YoungGap(const PowerKInfinity& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// The unique a attaining equality in YoungGap: b (gamma')^{-1}(|b|) / |b|,
/// or 0 when b = 0.
Eigen::VectorXd YoungArgmax(const PowerKInfinity& g, const Eigen::VectorXd& b);

}  // namespace homopt
