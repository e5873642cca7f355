#include "homopt/expr.h"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "homopt/errors.h"

namespace homopt {

// ---------------------------------------------------------------------------
// Rational

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  num_ = g == 0 ? 0 : num / g;
  den_ = g == 0 ? 1 : den / g;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}
Rational operator*(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.num_, a.den_ * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_, a.den_ * b.num_);
}

// ---------------------------------------------------------------------------
// Nodes

struct Expr::Node {
  Kind kind = Kind::kConst;
  double value = 0.0;
  int var = -1;
  Rational exponent;
  std::vector<Expr> args;
};

namespace {

using Kind = Expr::Kind;

bool IsPower(Kind k) { return k == Kind::kPow || k == Kind::kSPow || k == Kind::kAPow; }

}  // namespace

Expr::Expr() : Expr(Constant(0.0)) {}

Expr Expr::Constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kConst;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::Var(int index) {
  if (index < 0) throw DomainError("negative variable index");
  auto n = std::make_shared<Node>();
  n->kind = Kind::kVar;
  n->var = index;
  return Expr(std::move(n));
}

Expr Expr::Time() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kTime;
  return Expr(std::move(n));
}

namespace {

Expr MakeUnary(Kind kind, Expr a);
Expr MakeBinary(Kind kind, Expr a, Expr b);
Expr MakePower(Kind kind, Expr base, Rational q);

}  // namespace

Expr Expr::Neg(Expr a) { return MakeUnary(Kind::kNeg, std::move(a)); }
Expr Expr::Abs(Expr a) { return MakeUnary(Kind::kAbs, std::move(a)); }
Expr Expr::Sqrt(Expr a) { return MakeUnary(Kind::kSqrt, std::move(a)); }
Expr Expr::Sign(Expr a) { return MakeUnary(Kind::kSign, std::move(a)); }
Expr Expr::Pow(Expr base, Rational q) { return MakePower(Kind::kPow, std::move(base), q); }
Expr Expr::SPow(Expr base, Rational q) { return MakePower(Kind::kSPow, std::move(base), q); }
Expr Expr::APow(Expr base, Rational q) { return MakePower(Kind::kAPow, std::move(base), q); }

Expr operator+(Expr a, Expr b) { return MakeBinary(Kind::kAdd, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return MakeBinary(Kind::kSub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return MakeBinary(Kind::kMul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return MakeBinary(Kind::kDiv, std::move(a), std::move(b)); }

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::constant() const { return node_->value; }
int Expr::var_index() const { return node_->var; }
const Rational& Expr::exponent() const { return node_->exponent; }
const std::vector<Expr>& Expr::args() const { return node_->args; }

class ExprFactory {
 public:
  static Expr Wrap(std::shared_ptr<const Expr::Node> n) { return Expr(std::move(n)); }
};

namespace {

Expr MakeUnary(Kind kind, Expr a) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->args.push_back(std::move(a));
  return ExprFactory::Wrap(std::move(n));
}

Expr MakeBinary(Kind kind, Expr a, Expr b) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->args.push_back(std::move(a));
  n->args.push_back(std::move(b));
  return ExprFactory::Wrap(std::move(n));
}

Expr MakePower(Kind kind, Expr base, Rational q) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->exponent = q;
  n->args.push_back(std::move(base));
  return ExprFactory::Wrap(std::move(n));
}

// ---------------------------------------------------------------------------
// Evaluation

double PowerChecked(double base, const Rational& q) {
  if (base == 0.0 && q.num() < 0) throw EvalError("division by zero (zero base, negative exponent)");
  return std::pow(base, q.value());
}

double EvalNode(const Expr& e, const Eigen::Ref<const Eigen::VectorXd>& x,
                const std::optional<double>& t) {
  switch (e.kind()) {
    case Kind::kConst:
      return e.constant();
    case Kind::kVar:
      if (e.var_index() >= x.size()) {
        throw EvalError("unbound variable x" + std::to_string(e.var_index() + 1));
      }
      return x[e.var_index()];
    case Kind::kTime:
      if (!t) throw EvalError("unbound variable t");
      return *t;
    case Kind::kNeg:
      return -EvalNode(e.args()[0], x, t);
    case Kind::kAbs:
      return std::abs(EvalNode(e.args()[0], x, t));
    case Kind::kSqrt: {
      const double v = EvalNode(e.args()[0], x, t);
      if (v < 0.0) throw EvalError("sqrt of negative value");
      return std::sqrt(v);
    }
    case Kind::kSign: {
      const double v = EvalNode(e.args()[0], x, t);
      return static_cast<double>((v > 0.0) - (v < 0.0));
    }
    case Kind::kAdd:
      return EvalNode(e.args()[0], x, t) + EvalNode(e.args()[1], x, t);
    case Kind::kSub:
      return EvalNode(e.args()[0], x, t) - EvalNode(e.args()[1], x, t);
    case Kind::kMul:
      return EvalNode(e.args()[0], x, t) * EvalNode(e.args()[1], x, t);
    case Kind::kDiv: {
      const double den = EvalNode(e.args()[1], x, t);
      if (den == 0.0) throw EvalError("division by zero");
      return EvalNode(e.args()[0], x, t) / den;
    }
    case Kind::kPow: {
      const double b = EvalNode(e.args()[0], x, t);
      const Rational& q = e.exponent();
      if (b < 0.0 && !q.is_integer()) {
        throw EvalError("negative base with non-integer exponent " + q.str());
      }
      return PowerChecked(b, q);
    }
    case Kind::kSPow: {
      const double b = EvalNode(e.args()[0], x, t);
      const double s = static_cast<double>((b > 0.0) - (b < 0.0));
      if (b == 0.0) {
        if (e.exponent().num() < 0) throw EvalError("division by zero (spow of zero)");
        return 0.0;
      }
      return s * std::pow(std::abs(b), e.exponent().value());
    }
    case Kind::kAPow: {
      const double b = EvalNode(e.args()[0], x, t);
      return PowerChecked(std::abs(b), e.exponent());
    }
  }
  throw EvalError("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Differentiation. Zero/one operands are folded so derivative trees of
// independent subexpressions vanish; no other rewriting happens.

bool IsConst(const Expr& e, double v) { return e.kind() == Kind::kConst && e.constant() == v; }

Expr Add(Expr a, Expr b) {
  if (IsConst(a, 0.0)) return b;
  if (IsConst(b, 0.0)) return a;
  return a + b;
}
Expr Sub(Expr a, Expr b) {
  if (IsConst(b, 0.0)) return a;
  if (IsConst(a, 0.0)) return Expr::Neg(std::move(b));
  return a - b;
}
Expr Mul(Expr a, Expr b) {
  if (IsConst(a, 0.0) || IsConst(b, 0.0)) return Expr::Constant(0.0);
  if (IsConst(a, 1.0)) return b;
  if (IsConst(b, 1.0)) return a;
  return a * b;
}
Expr Scale(const Rational& q, Expr e) { return Mul(Expr::Constant(q.value()), std::move(e)); }

Expr DiffNode(const Expr& e, int var) {
  switch (e.kind()) {
    case Kind::kConst:
    case Kind::kTime:
    case Kind::kSign:
      return Expr::Constant(0.0);
    case Kind::kVar:
      return Expr::Constant(e.var_index() == var ? 1.0 : 0.0);
    case Kind::kNeg: {
      Expr d = DiffNode(e.args()[0], var);
      return d.is_zero() ? d : Expr::Neg(d);
    }
    case Kind::kAbs:
      return Mul(Expr::Sign(e.args()[0]), DiffNode(e.args()[0], var));
    case Kind::kSqrt: {
      Expr d = DiffNode(e.args()[0], var);
      if (d.is_zero()) return d;
      return d / (Expr::Constant(2.0) * e);
    }
    case Kind::kAdd:
      return Add(DiffNode(e.args()[0], var), DiffNode(e.args()[1], var));
    case Kind::kSub:
      return Sub(DiffNode(e.args()[0], var), DiffNode(e.args()[1], var));
    case Kind::kMul: {
      const Expr& u = e.args()[0];
      const Expr& v = e.args()[1];
      return Add(Mul(DiffNode(u, var), v), Mul(u, DiffNode(v, var)));
    }
    case Kind::kDiv: {
      const Expr& u = e.args()[0];
      const Expr& v = e.args()[1];
      Expr du = DiffNode(u, var);
      Expr dv = DiffNode(v, var);
      if (dv.is_zero()) return du.is_zero() ? du : du / v;
      return Sub(Mul(du, v), Mul(u, dv)) / Expr::Pow(v, Rational(2));
    }
    case Kind::kPow:
    case Kind::kSPow:
    case Kind::kAPow: {
      const Expr& u = e.args()[0];
      const Rational& q = e.exponent();
      Expr du = DiffNode(u, var);
      if (du.is_zero() || q.num() == 0) return Expr::Constant(0.0);
      const Rational qm1 = q - Rational(1);
      Expr inner;
      if (e.kind() == Kind::kPow) {
        inner = qm1.num() == 0 ? Expr::Constant(1.0) : Expr::Pow(u, qm1);
      } else if (e.kind() == Kind::kSPow) {
        inner = Expr::APow(u, qm1);
      } else {
        inner = Expr::SPow(u, qm1);
      }
      return Mul(Scale(q, std::move(inner)), du);
    }
  }
  throw EvalError("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Printing

int Precedence(const Expr& e) {
  switch (e.kind()) {
    case Kind::kAdd:
    case Kind::kSub:
      return 1;
    case Kind::kMul:
    case Kind::kDiv:
      return 2;
    case Kind::kNeg:
      return 3;
    case Kind::kPow:
      return 4;
    case Kind::kConst:
      return e.constant() < 0.0 || std::signbit(e.constant()) ? 0 : 5;
    default:
      return 5;
  }
}

std::string FormatNumber(double v) {
  if (std::isfinite(v) && v == std::nearbyint(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Print(const Expr& e, std::ostringstream& os);

void PrintChild(const Expr& child, bool parens, std::ostringstream& os) {
  if (parens) os << '(';
  Print(child, os);
  if (parens) os << ')';
}

void Print(const Expr& e, std::ostringstream& os) {
  switch (e.kind()) {
    case Kind::kConst:
      if (std::signbit(e.constant())) {
        os << "(-" << FormatNumber(-e.constant()) << ')';
      } else {
        os << FormatNumber(e.constant());
      }
      return;
    case Kind::kVar:
      os << 'x' << e.var_index() + 1;
      return;
    case Kind::kTime:
      os << 't';
      return;
    case Kind::kNeg: {
      const Expr& a = e.args()[0];
      os << '-';
      // A bare literal after '-' would re-parse as a negative constant.
      PrintChild(a, Precedence(a) < 4 || a.kind() == Kind::kConst, os);
      return;
    }
    case Kind::kAbs:
    case Kind::kSqrt:
    case Kind::kSign:
      os << (e.kind() == Kind::kAbs ? "abs(" : e.kind() == Kind::kSqrt ? "sqrt(" : "sign(");
      Print(e.args()[0], os);
      os << ')';
      return;
    case Kind::kAdd:
    case Kind::kSub:
    case Kind::kMul:
    case Kind::kDiv: {
      const int p = Precedence(e);
      const Expr& a = e.args()[0];
      const Expr& b = e.args()[1];
      PrintChild(a, Precedence(a) < p, os);
      os << (e.kind() == Kind::kAdd   ? " + "
             : e.kind() == Kind::kSub ? " - "
             : e.kind() == Kind::kMul ? "*"
                                      : "/");
      PrintChild(b, Precedence(b) <= p || Precedence(b) == 3, os);
      return;
    }
    case Kind::kPow: {
      const Expr& a = e.args()[0];
      PrintChild(a, Precedence(a) <= 4, os);
      const Rational& q = e.exponent();
      if (q.is_integer() && q.num() >= 0) {
        os << '^' << q.num();
      } else {
        os << "^(" << q.str() << ')';
      }
      return;
    }
    case Kind::kSPow:
    case Kind::kAPow:
      os << (e.kind() == Kind::kSPow ? "spow(" : "apow(");
      Print(e.args()[0], os);
      os << ", " << e.exponent().str() << ')';
      return;
  }
}

bool Equal(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Kind::kConst:
      return a.constant() == b.constant() &&
             std::signbit(a.constant()) == std::signbit(b.constant());
    case Kind::kVar:
      return a.var_index() == b.var_index();
    case Kind::kTime:
      return true;
    default:
      break;
  }
  if (IsPower(a.kind()) && !(a.exponent() == b.exponent())) return false;
  if (a.args().size() != b.args().size()) return false;
  for (std::size_t i = 0; i < a.args().size(); ++i) {
    if (!Equal(a.args()[i], b.args()[i])) return false;
  }
  return true;
}

}  // namespace

double Expr::Eval(const Eigen::Ref<const Eigen::VectorXd>& x, std::optional<double> t) const {
  return EvalNode(*this, x, t);
}

Expr Expr::Diff(int var) const { return DiffNode(*this, var); }

std::string Expr::ToString() const {
  std::ostringstream os;
  Print(*this, os);
  return os.str();
}

bool Expr::StructurallyEquals(const Expr& other) const { return Equal(*this, other); }

int Expr::MaxVarIndex() const {
  int m = kind() == Kind::kVar ? var_index() : -1;
  for (const Expr& a : args()) m = std::max(m, a.MaxVarIndex());
  return m;
}

bool Expr::UsesTime() const {
  if (kind() == Kind::kTime) return true;
  for (const Expr& a : args()) {
    if (a.UsesTime()) return true;
  }
  return false;
}

std::size_t Expr::NodeCount() const {
  std::size_t c = 1;
  for (const Expr& a : args()) c += a.NodeCount();
  return c;
}

// ---------------------------------------------------------------------------
// Lexer and parser

namespace {

enum class Tok {
  kNumber,
  kIdent,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kCaret,
  kLParen,
  kRParen,
  kComma,
  kLess,
  kLessEq,
  kGreater,
  kGreaterEq,
  kAnd,
  kOr,
  kNot,
  kEnd,
};

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
};

std::vector<Token> Lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
      }
      out.push_back({Tok::kNumber, start, std::string(s.substr(start, i - start))});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::kIdent, start, std::string(s.substr(start, i - start))});
      continue;
    }
    auto two = [&](char next) { return i + 1 < s.size() && s[i + 1] == next; };
    Tok kind;
    std::size_t len = 1;
    switch (c) {
      case '+': kind = Tok::kPlus; break;
      case '-': kind = Tok::kMinus; break;
      case '*': kind = Tok::kStar; break;
      case '/': kind = Tok::kSlash; break;
      case '^': kind = Tok::kCaret; break;
      case '(': kind = Tok::kLParen; break;
      case ')': kind = Tok::kRParen; break;
      case ',': kind = Tok::kComma; break;
      case '!': kind = Tok::kNot; break;
      case '<':
        kind = two('=') ? Tok::kLessEq : Tok::kLess;
        len = two('=') ? 2 : 1;
        break;
      case '>':
        kind = two('=') ? Tok::kGreaterEq : Tok::kGreater;
        len = two('=') ? 2 : 1;
        break;
      case '&':
        if (!two('&')) throw ParseError(i, "expected '&&'");
        kind = Tok::kAnd;
        len = 2;
        break;
      case '|':
        if (!two('|')) throw ParseError(i, "expected '||'");
        kind = Tok::kOr;
        len = 2;
        break;
      default:
        throw ParseError(i, std::string("unexpected character '") + c + "'");
    }
    out.push_back({kind, start, std::string(s.substr(start, len))});
    i += len;
  }
  out.push_back({Tok::kEnd, s.size(), ""});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, int num_vars) : toks_(Lex(text)), num_vars_(num_vars) {}

  Expr ParseFullExpr() {
    Expr e = ParseSum();
    Expect(Tok::kEnd, "unexpected trailing input");
    return e;
  }

  std::size_t pos() const { return idx_; }
  void reset(std::size_t idx) { idx_ = idx; }
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(idx_ + ahead, toks_.size() - 1)];
  }
  bool accept(Tok k) {
    if (peek().kind == k) {
      ++idx_;
      return true;
    }
    return false;
  }
  void Expect(Tok k, const char* what) {
    if (!accept(k)) throw ParseError(peek().pos, what);
  }

  Expr ParseSum() {
    Expr e = ParseProduct();
    while (true) {
      if (accept(Tok::kPlus)) {
        e = e + ParseProduct();
      } else if (accept(Tok::kMinus)) {
        e = e - ParseProduct();
      } else {
        return e;
      }
    }
  }

  Expr ParseProduct() {
    Expr e = ParseUnary();
    while (true) {
      if (accept(Tok::kStar)) {
        e = e * ParseUnary();
      } else if (accept(Tok::kSlash)) {
        e = e / ParseUnary();
      } else {
        return e;
      }
    }
  }

  Expr ParseUnary() {
    if (peek().kind == Tok::kMinus) {
      // "-3" is a negative literal unless a power binds the literal first.
      if (peek(1).kind == Tok::kNumber && peek(2).kind != Tok::kCaret) {
        ++idx_;
        const Token& num = peek();
        ++idx_;
        return Expr::Constant(-ParseNumber(num));
      }
      ++idx_;
      return Expr::Neg(ParseUnary());
    }
    return ParsePower();
  }

  Expr ParsePower() {
    Expr base = ParseAtom();
    if (accept(Tok::kCaret)) {
      Rational q = ParseRationalLiteral();
      if (peek().kind == Tok::kCaret) {
        throw ParseError(peek().pos, "exponent must be a rational literal");
      }
      return Expr::Pow(std::move(base), q);
    }
    return base;
  }

  // Integer with optional sign and optional "/integer", possibly wrapped
  // in parentheses.
  Rational ParseRationalLiteral() {
    if (accept(Tok::kLParen)) {
      Rational q = ParseRationalLiteral();
      Expect(Tok::kRParen, "expected ')' after exponent");
      return q;
    }
    bool neg = false;
    if (accept(Tok::kMinus)) {
      neg = true;
    } else {
      accept(Tok::kPlus);
    }
    const std::int64_t num = ParseInteger("exponent must be a rational literal");
    std::int64_t den = 1;
    if (peek().kind == Tok::kSlash && peek(1).kind == Tok::kNumber && IsInteger(peek(1).text)) {
      ++idx_;
      den = ParseInteger("expected integer denominator");
      if (den == 0) throw ParseError(toks_[idx_ - 1].pos, "zero denominator in exponent");
    }
    return Rational(neg ? -num : num, den);
  }

  static bool IsInteger(const std::string& s) {
    return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
  }

  std::int64_t ParseInteger(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::kNumber || !IsInteger(t.text) || t.text.size() > 17) {
      throw ParseError(t.pos, what);
    }
    ++idx_;
    return std::stoll(t.text);
  }

  static double ParseNumber(const Token& t) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t.text, &used);
    } catch (const std::exception&) {
      throw ParseError(t.pos, "malformed number '" + t.text + "'");
    }
    if (used != t.text.size()) throw ParseError(t.pos, "malformed number '" + t.text + "'");
    return v;
  }

  Expr ParseAtom() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::kNumber:
        ++idx_;
        return Expr::Constant(ParseNumber(t));
      case Tok::kLParen: {
        ++idx_;
        Expr e = ParseSum();
        Expect(Tok::kRParen, "expected ')'");
        return e;
      }
      case Tok::kIdent:
        ++idx_;
        return ParseIdent(t);
      case Tok::kEnd:
        throw ParseError(t.pos, "unexpected end of input");
      default:
        throw ParseError(t.pos, "unexpected token '" + t.text + "'");
    }
  }

  Expr ParseIdent(const Token& t) {
    const std::string& name = t.text;
    if (name == "t") return Expr::Time();
    if (name.size() >= 2 && name[0] == 'x' && IsInteger(name.substr(1)) && name[1] != '0' &&
        name.size() < 8) {
      const int index = std::stoi(name.substr(1)) - 1;
      if (num_vars_ >= 0 && index >= num_vars_) {
        throw ParseError(t.pos, "unknown identifier '" + name + "'");
      }
      return Expr::Var(index);
    }
    const bool unary_fn = name == "abs" || name == "sqrt" || name == "sign";
    const bool power_fn = name == "pow" || name == "spow" || name == "apow";
    if (!unary_fn && !power_fn) throw ParseError(t.pos, "unknown identifier '" + name + "'");
    Expect(Tok::kLParen, "expected '(' after function name");
    Expr arg = ParseSum();
    if (unary_fn) {
      Expect(Tok::kRParen, "expected ')'");
      if (name == "abs") return Expr::Abs(std::move(arg));
      if (name == "sqrt") return Expr::Sqrt(std::move(arg));
      return Expr::Sign(std::move(arg));
    }
    Expect(Tok::kComma, "expected ',' before exponent");
    Rational q = ParseRationalLiteral();
    Expect(Tok::kRParen, "expected ')'");
    if (name == "pow") return Expr::Pow(std::move(arg), q);
    if (name == "spow") return Expr::SPow(std::move(arg), q);
    return Expr::APow(std::move(arg), q);
  }

 private:
  std::vector<Token> toks_;
  std::size_t idx_ = 0;
  int num_vars_;
};

}  // namespace

Expr Parse(std::string_view text, int num_vars) {
  Parser p(text, num_vars);
  return p.ParseFullExpr();
}

// ---------------------------------------------------------------------------
// Predicates

struct Predicate::Node {
  enum class Op { kTrue, kFalse, kLess, kLessEq, kGreater, kGreaterEq, kAnd, kOr, kNot };
  Op op = Op::kTrue;
  Expr lhs;
  Expr rhs;
  std::vector<std::shared_ptr<const Node>> children;
};

namespace {

using PNode = Predicate::Node;
using PNodePtr = std::shared_ptr<const PNode>;

class PredicateParser {
 public:
  PredicateParser(std::string_view text, int num_vars) : p_(text, num_vars) {}

  PNodePtr ParseFull() {
    PNodePtr n = ParseOr();
    p_.Expect(Tok::kEnd, "unexpected trailing input");
    return n;
  }

 private:
  PNodePtr ParseOr() {
    PNodePtr n = ParseAnd();
    while (p_.accept(Tok::kOr)) n = Combine(PNode::Op::kOr, n, ParseAnd());
    return n;
  }

  PNodePtr ParseAnd() {
    PNodePtr n = ParseNot();
    while (p_.accept(Tok::kAnd)) n = Combine(PNode::Op::kAnd, n, ParseNot());
    return n;
  }

  PNodePtr ParseNot() {
    if (p_.accept(Tok::kNot)) {
      auto n = std::make_shared<PNode>();
      n->op = PNode::Op::kNot;
      n->children.push_back(ParseNot());
      return n;
    }
    if (p_.peek().kind == Tok::kIdent &&
        (p_.peek().text == "true" || p_.peek().text == "false")) {
      auto n = std::make_shared<PNode>();
      n->op = p_.peek().text == "true" ? PNode::Op::kTrue : PNode::Op::kFalse;
      p_.accept(Tok::kIdent);
      return n;
    }
    if (p_.peek().kind == Tok::kLParen) {
      // Either a parenthesized predicate or a comparison whose left side
      // starts with '('.
      const std::size_t save = p_.pos();
      try {
        p_.accept(Tok::kLParen);
        PNodePtr inner = ParseOr();
        p_.Expect(Tok::kRParen, "expected ')'");
        const Tok next = p_.peek().kind;
        if (next == Tok::kEnd || next == Tok::kAnd || next == Tok::kOr || next == Tok::kRParen) {
          return inner;
        }
      } catch (const ParseError&) {
      }
      p_.reset(save);
    }
    return ParseComparison();
  }

  PNodePtr ParseComparison() {
    auto n = std::make_shared<PNode>();
    n->lhs = p_.ParseSum();
    const Token op = p_.peek();
    switch (op.kind) {
      case Tok::kLess: n->op = PNode::Op::kLess; break;
      case Tok::kLessEq: n->op = PNode::Op::kLessEq; break;
      case Tok::kGreater: n->op = PNode::Op::kGreater; break;
      case Tok::kGreaterEq: n->op = PNode::Op::kGreaterEq; break;
      default:
        throw ParseError(op.pos, "expected comparison operator");
    }
    p_.accept(op.kind);
    n->rhs = p_.ParseSum();
    return n;
  }

  static PNodePtr Combine(PNode::Op op, PNodePtr a, PNodePtr b) {
    auto n = std::make_shared<PNode>();
    n->op = op;
    n->children = {std::move(a), std::move(b)};
    return n;
  }

  Parser p_;
};

bool EvalPredicate(const PNode& n, const Eigen::Ref<const Eigen::VectorXd>& x) {
  using Op = PNode::Op;
  switch (n.op) {
    case Op::kTrue: return true;
    case Op::kFalse: return false;
    case Op::kLess: return n.lhs.Eval(x) < n.rhs.Eval(x);
    case Op::kLessEq: return n.lhs.Eval(x) <= n.rhs.Eval(x);
    case Op::kGreater: return n.lhs.Eval(x) > n.rhs.Eval(x);
    case Op::kGreaterEq: return n.lhs.Eval(x) >= n.rhs.Eval(x);
    case Op::kAnd: return EvalPredicate(*n.children[0], x) && EvalPredicate(*n.children[1], x);
    case Op::kOr: return EvalPredicate(*n.children[0], x) || EvalPredicate(*n.children[1], x);
    case Op::kNot: return !EvalPredicate(*n.children[0], x);
  }
  return false;
}

std::string PrintPredicate(const PNode& n) {
  using Op = PNode::Op;
  switch (n.op) {
    case Op::kTrue: return "true";
    case Op::kFalse: return "false";
    case Op::kLess: return n.lhs.ToString() + " < " + n.rhs.ToString();
    case Op::kLessEq: return n.lhs.ToString() + " <= " + n.rhs.ToString();
    case Op::kGreater: return n.lhs.ToString() + " > " + n.rhs.ToString();
    case Op::kGreaterEq: return n.lhs.ToString() + " >= " + n.rhs.ToString();
    case Op::kAnd:
      return "(" + PrintPredicate(*n.children[0]) + ") && (" + PrintPredicate(*n.children[1]) + ")";
    case Op::kOr:
      return "(" + PrintPredicate(*n.children[0]) + ") || (" + PrintPredicate(*n.children[1]) + ")";
    case Op::kNot: return "!(" + PrintPredicate(*n.children[0]) + ")";
  }
  return "false";
}

}  // namespace

Predicate::Predicate() : node_(std::make_shared<Node>()) {}

Predicate Predicate::Parse(std::string_view text, int num_vars) {
  PredicateParser p(text, num_vars);
  return Predicate(p.ParseFull());
}

bool Predicate::Eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return EvalPredicate(*node_, x);
}

std::string Predicate::ToString() const { return PrintPredicate(*node_); }

}  // namespace homopt
