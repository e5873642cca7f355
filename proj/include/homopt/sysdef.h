#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "homopt/expr.h"
#include "homopt/homogeneity.h"
#include "homopt/lft.h"

namespace homopt {

/// x' = f(x) + G1(x) u + G2(x) w,  y = h(x) + d u  with scalar u.
struct HomogeneousSystem {
  int n = 0;
  int xi = 0;
  int l_out = 0;
  Dilation dilation{std::vector<double>{1.0}};
  double k = 0.0;
  std::vector<Expr> f;
  std::vector<Expr> G1;
  std::vector<std::vector<Expr>> G2;  // n rows, xi columns
  std::vector<Expr> h;
  Vec d;
  double theta = 0.0;

  double r0() const { return dilation.min_weight(); }
  /// k + r0, the degree of L_G1 V and of the controller.
  double kr0() const { return k + r0(); }

  /// Throws DomainError on inconsistent dimensions or variables out of range.
  void CheckShape() const;

  Vec F(const Vec& x) const;
  Vec G1At(const Vec& x) const;
  Eigen::MatrixXd G2At(const Vec& x) const;
  Vec H(const Vec& x) const;
  /// y = h(x) + d u.
  Vec Output(const Vec& x, double u) const;
};

struct LyapunovCandidate {
  Expr V;
  double degree = 0.0;
  double nu = 0.0;  // exponent of the homogeneous norm
};

HomogeneousNorm NormFor(const HomogeneousSystem& sys, const LyapunovCandidate& lyap);

/// Symbolic Lie derivatives of V along f, G1 and the columns of G2. Every
/// function returns exactly 0 at x = 0.
class LieDerivatives {
 public:
  LieDerivatives(const HomogeneousSystem& sys, const LyapunovCandidate& lyap);

  double V(const Vec& x) const;
  Vec Gradient(const Vec& x) const;
  double LfV(const Vec& x) const;
  double LG1V(const Vec& x) const;
  Vec LG2V(const Vec& x) const;
  /// Lie derivative of V along an arbitrary numeric field value.
  double Along(const Vec& x, const Vec& field) const;

  const Expr& V_expr() const { return v_; }
  const std::vector<Expr>& gradient_expr() const { return grad_; }
  const Expr& LfV_expr() const { return lfv_; }
  const Expr& LG1V_expr() const { return lg1v_; }
  const std::vector<Expr>& LG2V_expr() const { return lg2v_; }

 private:
  Expr v_;
  std::vector<Expr> grad_;
  Expr lfv_;
  Expr lg1v_;
  std::vector<Expr> lg2v_;
};

LieDerivatives MakeLieDerivatives(const HomogeneousSystem& sys, const LyapunovCandidate& lyap);

struct ValidationCheck {
  std::string name;
  bool pass = true;
  double max_error = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool pass = true;
  bool synthesizable = true;
  std::string note;
};

ValidationReport ValidateSystem(const HomogeneousSystem& sys, const LyapunovCandidate& lyap,
                                int samples = 64, double tol = 1e-8, std::uint64_t seed = 42);

/// Cost pieces E, l, R1, R2 as expressions and gamma0 as a power law.
struct FixtureCost {
  Expr E;
  Expr l;
  Expr R1;
  Expr R2;
  PowerKInfinity gamma0{1.0, 2.0};
};

/// Design parameters that accompany a fixture through synthesis.
struct FixtureDesign {
  double c10 = 1.0;
  std::optional<double> pi_coeff;
  std::string q0;
  double beta = 2.0;
  double lambda = 2.0;
  std::optional<double> kappa;
  double kappa_margin = 0.043;
};

struct ExampleFixture {
  std::string id;
  std::string description;
  HomogeneousSystem system;
  LyapunovCandidate lyapunov;
  std::optional<Expr> controller;  // alpha*(x)
  std::optional<FixtureCost> cost;
  std::optional<FixtureDesign> design;
};

std::vector<ExampleFixture> BuiltinExamples();
/// Looks up "ex1".."ex4"; throws DomainError otherwise.
ExampleFixture BuiltinExample(const std::string& id);

/// Builds a system from expression strings; shapes are checked.
HomogeneousSystem MakeSystem(const std::vector<double>& weights, double k,
                             const std::vector<std::string>& f,
                             const std::vector<std::string>& G1,
                             const std::vector<std::vector<std::string>>& G2,
                             const std::vector<std::string>& h, const std::vector<double>& d,
                             std::optional<double> theta = std::nullopt);

}  // namespace homopt
