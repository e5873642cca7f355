#pragma once

// A small expression language for writing homogeneous vector fields,
// Lyapunov candidates and set predicates as text.
//
// Grammar (precedence low to high):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' rational)?
//   atom    := number | x1..xn | t | '(' sum ')'
//            | abs(e) | sqrt(e) | sign(e) | pow(e, q) | spow(e, q) | apow(e, q)
// where `rational` is an integer literal with optional sign and optional
// "/integer" denominator, possibly parenthesized: 3, 4/3, -1/2, (4/3).
//
// spow(e, q) = sign(e)|e|^q and apow(e, q) = |e|^q are the signed and
// absolute powers that homogeneous systems need. A plain `^` with a
// non-integer exponent requires a nonnegative base at evaluation time.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace homopt {

/// Exact rational number with 64-bit numerator and positive denominator.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

class Expr {
 public:
  enum class Kind {
    kConst,
    kVar,
    kTime,
    kNeg,
    kAbs,
    kSqrt,
    kSign,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kPow,
    kSPow,
    kAPow,
  };

  /// The zero constant.
  Expr();

  static Expr Constant(double value);
  /// State variable x_{index+1}; `index` is zero-based.
  static Expr Var(int index);
  static Expr Time();

  static Expr Neg(Expr a);
  static Expr Abs(Expr a);
  static Expr Sqrt(Expr a);
  static Expr Sign(Expr a);
  static Expr Pow(Expr base, Rational exponent);
  static Expr SPow(Expr base, Rational exponent);
  static Expr APow(Expr base, Rational exponent);

  friend Expr operator+(Expr a, Expr b);
  friend Expr operator-(Expr a, Expr b);
  friend Expr operator*(Expr a, Expr b);
  friend Expr operator/(Expr a, Expr b);
  friend Expr operator-(Expr a) { return Neg(std::move(a)); }

  Kind kind() const;
  double constant() const;
  int var_index() const;
  const Rational& exponent() const;
  /// Operands: one for unary nodes and powers, two for binary nodes.
  const std::vector<Expr>& args() const;

  bool is_zero() const { return kind() == Kind::kConst && constant() == 0.0; }

  /// IEEE double evaluation. `t` binds the time variable; leaving it unset
  /// makes any use of `t` an unbound-variable error.
  double Eval(const Eigen::Ref<const Eigen::VectorXd>& x,
              std::optional<double> t = std::nullopt) const;

  /// Symbolic partial derivative with respect to x_{var+1}.
  Expr Diff(int var) const;

  /// Text in the grammar above; Parse(e.ToString()) is structurally equal
  /// to e.
  std::string ToString() const;

  bool StructurallyEquals(const Expr& other) const;

  /// Largest zero-based variable index referenced, or -1.
  int MaxVarIndex() const;
  bool UsesTime() const;
  std::size_t NodeCount() const;

  struct Node;

 private:
  friend class ExprFactory;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Parses `text`. When `num_vars` is nonnegative, variables beyond
/// x_{num_vars} are rejected as unknown identifiers.
Expr Parse(std::string_view text, int num_vars = -1);

/// Boolean combination of comparisons between expressions, e.g.
/// "abs(x1) >= 4*abs(x2)^3". Supports <, <=, >, >=, &&, ||, !, true,
/// false and parentheses.
class Predicate {
 public:
  /// Constant-true predicate.
  Predicate();

  static Predicate Parse(std::string_view text, int num_vars = -1);

  bool Eval(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::string ToString() const;

  struct Node;

 private:
  explicit Predicate(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

}  // namespace homopt
