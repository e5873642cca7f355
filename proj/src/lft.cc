#include "homopt/lft.h"

#include <cmath>

#include "homopt/errors.h"

namespace homopt {

PowerKInfinity::PowerKInfinity(double a, double p) : a_(a), p_(p) {
  if (!(a_ > 0.0) || !std::isfinite(a_)) throw DomainError("K-infinity coefficient must be positive");
  if (!(p_ > 1.0) || !std::isfinite(p_)) throw DomainError("K-infinity exponent must exceed 1");
}

double PowerKInfinity::operator()(double s) const {
  if (s < 0.0) throw DomainError("K-infinity function evaluated at negative argument");
  return a_ * std::pow(s, p_);
}

double PowerKInfinity::Derivative(double s) const {
  if (s < 0.0) throw DomainError("K-infinity function evaluated at negative argument");
  return a_ * p_ * std::pow(s, p_ - 1.0);
}

double PowerKInfinity::InverseDerivative(double s) const {
  if (s < 0.0) throw DomainError("K-infinity function evaluated at negative argument");
  return std::pow(s / (a_ * p_), 1.0 / (p_ - 1.0));
}

bool PowerKInfinity::IsQuadratic() const { return std::abs(p_ - 2.0) <= 1e-12; }

PowerKInfinity LfTransform(const PowerKInfinity& g) {
  const double p = g.p();
  const double q = p / (p - 1.0);
  const double coeff = (p - 1.0) * std::pow(g.a(), -1.0 / (p - 1.0)) * std::pow(p, -q);
  return PowerKInfinity(coeff, q);
}

bool CheckScaling(const PowerKInfinity& g) {
  const PowerKInfinity l = LfTransform(g);
  bool numeric = true;
  for (double eps : {0.1, 0.5, 2.0, 7.0}) {
    for (double s : {0.3, 1.0, 4.0}) {
      const double lhs = l(2.0 * eps * s);
      const double rhs = eps * eps * l(2.0 * s);
      if (std::abs(lhs - rhs) > 1e-10 * std::max(std::abs(lhs), std::abs(rhs))) numeric = false;
    }
  }
  return g.IsQuadratic() && numeric;
}

double YoungGap(const PowerKInfinity& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DomainError("dimension mismatch in Young gap");
  return g(a.norm()) + LfTransform(g)(b.norm()) - a.dot(b);
}

Eigen::VectorXd YoungArgmax(const PowerKInfinity& g, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  if (nb == 0.0) return Eigen::VectorXd::Zero(b.size());
  return b * (g.InverseDerivative(nb) / nb);
}

}  // namespace homopt
