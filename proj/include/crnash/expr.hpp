#pragma once

#include <cctype>
#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "crnash/errors.hpp"
#include "crnash/rational.hpp"

namespace crnash {

// Parsed defining-function AST over complex variables z_1..z_m and their
// conjugates. Trees are normalized on construction: re/im are expanded,
// conj is pushed to the leaves, and literal-only subtrees are folded, so a
// normalized tree consists of Literal / Var / BarVar leaves combined with
// Add, Sub, Mul, Neg and integer Pow. z_k and zbar_k are treated as
// independent formal variables throughout; the binding zbar_k = conj(z_k)
// happens only at evaluation time.

enum class ExprKind : std::uint8_t {
  Literal,
  Var,     // z_k, 1-based index
  BarVar,  // zbar_k, 1-based index
  Add,
  Sub,
  Mul,
  Neg,
  Pow,
  // Pre-normalization only:
  Conj,
  Re,
  Im,
};

struct ExprNode;
using NodeP = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  CRational lit{};    // Literal
  int var = 0;        // Var / BarVar
  int exponent = 0;   // Pow
  NodeP a, b;         // children (b unused for unary)
};

/// Reference to a formal variable: z_k (bar=false) or zbar_k (bar=true).
struct VarRef {
  int index = 1;  // 1-based
  bool bar = false;
};

namespace detail {

inline NodeP node(ExprKind k) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  return n;
}

inline NodeP literal(CRational v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Literal;
  n->lit = v;
  return n;
}

inline NodeP variable(int k, bool bar) {
  auto n = std::make_shared<ExprNode>();
  n->kind = bar ? ExprKind::BarVar : ExprKind::Var;
  n->var = k;
  return n;
}

inline bool is_literal(const NodeP& n) { return n->kind == ExprKind::Literal; }

// Smart constructors: fold literal-only subtrees, drop units and zeros, and
// keep literal coefficients as the left factor of a Mul. All normalization
// paths (parser, conjugation, differentiation) build through these, which
// makes normalization idempotent by construction.
NodeP mk_add(NodeP a, NodeP b);
NodeP mk_sub(NodeP a, NodeP b);
NodeP mk_mul(NodeP a, NodeP b);
NodeP mk_neg(NodeP a);
NodeP mk_pow(NodeP a, int e);

inline NodeP mk_add(NodeP a, NodeP b) {
  if (is_literal(a) && is_literal(b)) return literal(a->lit + b->lit);
  if (is_literal(a) && a->lit.is_zero()) return b;
  if (is_literal(b) && b->lit.is_zero()) return a;
  auto n = node(ExprKind::Add);
  const_cast<ExprNode*>(n.get())->a = std::move(a);
  const_cast<ExprNode*>(n.get())->b = std::move(b);
  return n;
}

inline NodeP mk_neg(NodeP a) {
  if (is_literal(a)) return literal(-a->lit);
  if (a->kind == ExprKind::Neg) return a->a;
  auto n = node(ExprKind::Neg);
  const_cast<ExprNode*>(n.get())->a = std::move(a);
  return n;
}

inline NodeP mk_sub(NodeP a, NodeP b) {
  if (is_literal(a) && is_literal(b)) return literal(a->lit - b->lit);
  if (is_literal(b) && b->lit.is_zero()) return a;
  if (is_literal(a) && a->lit.is_zero()) return mk_neg(std::move(b));
  auto n = node(ExprKind::Sub);
  const_cast<ExprNode*>(n.get())->a = std::move(a);
  const_cast<ExprNode*>(n.get())->b = std::move(b);
  return n;
}

inline NodeP mk_mul(NodeP a, NodeP b) {
  if (is_literal(a) && is_literal(b)) return literal(a->lit * b->lit);
  if (is_literal(b)) std::swap(a, b);  // literal coefficient on the left
  if (is_literal(a)) {
    if (a->lit.is_zero()) return literal(CRational(0));
    if (a->lit == CRational(1)) return b;
    if (b->kind == ExprKind::Mul && is_literal(b->a)) {
      return mk_mul(literal(a->lit * b->a->lit), b->b);
    }
    if (b->kind == ExprKind::Neg) return mk_mul(literal(-a->lit), b->a);
  }
  auto n = node(ExprKind::Mul);
  const_cast<ExprNode*>(n.get())->a = std::move(a);
  const_cast<ExprNode*>(n.get())->b = std::move(b);
  return n;
}

inline NodeP mk_pow(NodeP a, int e) {
  if (e < 0) throw InternalError("negative exponent in expression");
  if (e == 0) return literal(CRational(1));
  if (e == 1) return a;
  if (is_literal(a)) return literal(a->lit.pow(e));
  auto n = node(ExprKind::Pow);
  const_cast<ExprNode*>(n.get())->a = std::move(a);
  const_cast<ExprNode*>(n.get())->exponent = e;
  return n;
}

// Structural conjugation: swap z_k <-> zbar_k, conjugate literals. Legal
// because every non-leaf primitive in the grammar is holomorphic.
inline NodeP conjify(const NodeP& n) {
  switch (n->kind) {
    case ExprKind::Literal: return literal(n->lit.conj());
    case ExprKind::Var: return variable(n->var, true);
    case ExprKind::BarVar: return variable(n->var, false);
    case ExprKind::Add: return mk_add(conjify(n->a), conjify(n->b));
    case ExprKind::Sub: return mk_sub(conjify(n->a), conjify(n->b));
    case ExprKind::Mul: return mk_mul(conjify(n->a), conjify(n->b));
    case ExprKind::Neg: return mk_neg(conjify(n->a));
    case ExprKind::Pow: return mk_pow(conjify(n->a), n->exponent);
    default: throw InternalError("conjify on non-normalized node");
  }
}

// Bottom-up normalization of a raw parse tree.
inline NodeP normalize(const NodeP& n) {
  switch (n->kind) {
    case ExprKind::Literal:
    case ExprKind::Var:
    case ExprKind::BarVar: return n;
    case ExprKind::Add: return mk_add(normalize(n->a), normalize(n->b));
    case ExprKind::Sub: return mk_sub(normalize(n->a), normalize(n->b));
    case ExprKind::Mul: return mk_mul(normalize(n->a), normalize(n->b));
    case ExprKind::Neg: return mk_neg(normalize(n->a));
    case ExprKind::Pow: return mk_pow(normalize(n->a), n->exponent);
    case ExprKind::Conj: return conjify(normalize(n->a));
    case ExprKind::Re: {
      NodeP e = normalize(n->a);
      // re(E) = (E + conj E)/2
      return mk_mul(literal(CRational(Rational(1, 2), Rational(0))), mk_add(e, conjify(e)));
    }
    case ExprKind::Im: {
      NodeP e = normalize(n->a);
      // im(E) = (E - conj E)/(2i) = (-i/2)(E - conj E)
      return mk_mul(literal(CRational(Rational(0), Rational(-1, 2))), mk_sub(e, conjify(e)));
    }
  }
  throw InternalError("unreachable expr kind");
}

inline bool tree_equal(const NodeP& x, const NodeP& y) {
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case ExprKind::Literal: return x->lit == y->lit;
    case ExprKind::Var:
    case ExprKind::BarVar: return x->var == y->var;
    case ExprKind::Neg: return tree_equal(x->a, y->a);
    case ExprKind::Pow: return x->exponent == y->exponent && tree_equal(x->a, y->a);
    default: return tree_equal(x->a, y->a) && tree_equal(x->b, y->b);
  }
}

}  // namespace detail

/// Immutable normalized expression over m complex variables. Safe to share
/// across threads; evaluation is pure.
class Expr {
 public:
  Expr() = default;
  Expr(NodeP root, int nvars, std::vector<std::string> names)
      : root_(std::move(root)), nvars_(nvars), names_(std::move(names)) {}

  const NodeP& root() const { return root_; }
  int nvars() const { return nvars_; }
  const std::vector<std::string>& names() const { return names_; }
  bool valid() const { return root_ != nullptr; }

  friend bool operator==(const Expr& a, const Expr& b) {
    return a.nvars_ == b.nvars_ && detail::tree_equal(a.root_, b.root_);
  }

 private:
  NodeP root_;
  int nvars_ = 0;
  std::vector<std::string> names_;
};

// ---------------------------------------------------------------------------
// Parser. Grammar (whitespace insignificant, case-sensitive, no implicit
// multiplication):
//   expr   := term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' uint)?
//   atom   := 'i' | number | var | 'conj(' expr ')' | 're(' expr ')'
//           | 'im(' expr ')' | '(' expr ')' | '-' atom
//   number := digits ['.' digits]
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& names)
      : src_(src), names_(names) {}

  NodeP parse() {
    NodeP e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  NodeP parse_expr() {
    NodeP e = parse_term();
    for (;;) {
      skip_ws();
      if (match('+')) {
        e = raw_binary(ExprKind::Add, e, parse_term());
      } else if (match('-')) {
        e = raw_binary(ExprKind::Sub, e, parse_term());
      } else {
        return e;
      }
    }
  }

  NodeP parse_term() {
    NodeP e = parse_factor();
    for (;;) {
      skip_ws();
      if (match('*')) {
        e = raw_binary(ExprKind::Mul, e, parse_factor());
      } else {
        return e;
      }
    }
  }

  NodeP parse_factor() {
    NodeP base = parse_atom();
    skip_ws();
    if (match('^')) {
      skip_ws();
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        fail("expected a nonnegative integer exponent after '^'");
      }
      long long e = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        e = e * 10 + (src_[pos_] - '0');
        if (e > 1000) fail("exponent too large");
        ++pos_;
      }
      NodeP p = node(ExprKind::Pow);
      const_cast<ExprNode*>(p.get())->a = base;
      const_cast<ExprNode*>(p.get())->exponent = static_cast<int>(e);
      return p;
    }
    return base;
  }

  NodeP parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '-') {
      ++pos_;
      NodeP inner = parse_atom();
      NodeP n = node(ExprKind::Neg);
      const_cast<ExprNode*>(n.get())->a = inner;
      return n;
    }
    if (c == '(') {
      ++pos_;
      NodeP e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
    return nullptr;  // unreachable
  }

  NodeP parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        fail("expected digits after decimal point");
      }
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    Rational r = Rational::from_decimal(std::string(src_.substr(start, pos_ - start)));
    return literal(CRational(r, Rational(0)));
  }

  NodeP parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(src_.substr(start, pos_ - start));
    if (name == "i") return literal(CRational(Rational(0), Rational(1)));
    if (name == "conj" || name == "re" || name == "im") {
      expect('(');
      NodeP e = parse_expr();
      expect(')');
      ExprKind k = name == "conj" ? ExprKind::Conj : (name == "re" ? ExprKind::Re : ExprKind::Im);
      NodeP n = node(k);
      const_cast<ExprNode*>(n.get())->a = e;
      return n;
    }
    for (std::size_t k = 0; k < names_.size(); ++k) {
      if (names_[k] == name) return variable(static_cast<int>(k) + 1, false);
    }
    pos_ = start;  // point the error at the identifier
    fail("unknown variable '" + name + "'");
    return nullptr;  // unreachable
  }

  static NodeP raw_binary(ExprKind k, NodeP a, NodeP b) {
    NodeP n = node(k);
    const_cast<ExprNode*>(n.get())->a = std::move(a);
    const_cast<ExprNode*>(n.get())->b = std::move(b);
    return n;
  }

  bool match(char c) {
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (!match(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1, col = 1;
    for (std::size_t k = 0; k < pos_ && k < src_.size(); ++k) {
      if (src_[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    if (pos_ >= src_.size()) col = static_cast<int>(src_.size()) - last_line_start() + 1;
    throw ParseError(msg, line, col);
  }

  int last_line_start() const {
    int s = 0;
    for (std::size_t k = 0; k < src_.size(); ++k) {
      if (src_[k] == '\n') s = static_cast<int>(k) + 1;
    }
    return s;
  }

  std::string_view src_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse and normalize an expression over the declared variable names.
inline Expr parse(std::string_view source, const std::vector<std::string>& names) {
  detail::Parser p(source, names);
  NodeP raw = p.parse();
  return Expr(detail::normalize(raw), static_cast<int>(names.size()),
              std::vector<std::string>(names));
}

// ---------------------------------------------------------------------------
// Printing. Emits text that reparses to the same normalized tree: BarVar is
// rendered as conj(var), complex literals as parenthesized a+b*i sums.
// ---------------------------------------------------------------------------

namespace detail {

// Rationals appearing in normalized literals always have denominator 2^a 5^b
// (decimal input, halving from re/im expansion), so a finite decimal exists.
inline std::string decimal_string(const Rational& r) {
  long long den = r.den();
  int twos = 0, fives = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++fives;
  }
  if (den != 1) throw InternalError("literal denominator is not decimal-exact");
  int digits = twos > fives ? twos : fives;
  // scale numerator so the denominator becomes 10^digits
  __int128 scale = 1;
  for (int k = 0; k < digits - twos; ++k) scale *= 2;
  for (int k = 0; k < digits - fives; ++k) scale *= 5;
  __int128 scaled = static_cast<__int128>(r.num() < 0 ? -r.num() : r.num()) * scale;
  std::string body;
  if (digits == 0) {
    long long v = static_cast<long long>(scaled);
    body = std::to_string(v);
  } else {
    std::string raw;
    __int128 v = scaled;
    if (v == 0) raw = "0";
    while (v > 0) {
      raw.insert(raw.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    while (static_cast<int>(raw.size()) <= digits) raw.insert(raw.begin(), '0');
    raw.insert(raw.size() - digits, ".");
    body = raw;
  }
  return body;
}

// Renders |lit| as an atom-level string; sign handled by the caller.
inline std::string positive_literal_string(const CRational& v, bool* needs_neg) {
  *needs_neg = false;
  if (v.im.is_zero()) {
    Rational r = v.re;
    if (r < Rational(0)) {
      *needs_neg = true;
      r = -r;
    }
    return decimal_string(r);
  }
  if (v.re.is_zero()) {
    Rational m = v.im;
    if (m < Rational(0)) {
      *needs_neg = true;
      m = -m;
    }
    if (m == Rational(1)) return "i";
    return decimal_string(m) + "*i";
  }
  // Mixed literal: print as (a+b*i) or (a-b*i); leading '-' folds into a.
  Rational a = v.re, b = v.im;
  if (a < Rational(0)) {
    *needs_neg = true;
    a = -a;
    b = -b;
  }
  std::string s = "(" + decimal_string(a);
  if (b < Rational(0)) {
    Rational m = -b;
    s += " - " + (m == Rational(1) ? std::string("i") : decimal_string(m) + "*i");
  } else {
    s += " + " + (b == Rational(1) ? std::string("i") : decimal_string(b) + "*i");
  }
  return s + ")";
}

// precedence: Add/Sub 1, Mul 2, Pow 3, atoms 4
inline std::string print_node(const NodeP& n, const std::vector<std::string>& names, int parent) {
  auto wrap = [&](const std::string& s, int level) {
    return level < parent ? "(" + s + ")" : s;
  };
  switch (n->kind) {
    case ExprKind::Literal: {
      bool neg = false;
      std::string body = positive_literal_string(n->lit, &neg);
      if (!neg) return body;
      return wrap("-" + body, 1);
    }
    case ExprKind::Var: {
      int k = n->var - 1;
      return (k >= 0 && k < static_cast<int>(names.size())) ? names[k]
                                                            : "z" + std::to_string(n->var);
    }
    case ExprKind::BarVar: {
      int k = n->var - 1;
      std::string base = (k >= 0 && k < static_cast<int>(names.size()))
                             ? names[k]
                             : "z" + std::to_string(n->var);
      return "conj(" + base + ")";
    }
    case ExprKind::Add:
      return wrap(print_node(n->a, names, 1) + " + " + print_node(n->b, names, 2), 1);
    case ExprKind::Sub:
      return wrap(print_node(n->a, names, 1) + " - " + print_node(n->b, names, 2), 1);
    case ExprKind::Mul:
      return wrap(print_node(n->a, names, 2) + "*" + print_node(n->b, names, 3), 2);
    case ExprKind::Neg:
      return wrap("-" + print_node(n->a, names, 4), 1);
    case ExprKind::Pow:
      return print_node(n->a, names, 4) + "^" + std::to_string(n->exponent);
    default: throw InternalError("print on non-normalized node");
  }
}

}  // namespace detail

inline std::string print(const Expr& e) {
  return detail::print_node(e.root(), e.names(), 0);
}

// ---------------------------------------------------------------------------
// Evaluation and symbolic Wirtinger differentiation.
// ---------------------------------------------------------------------------

/// Generic bottom-up evaluation; Leaf maps (VarRef) -> T and Lit maps
/// (CRational) -> T. T needs +, -, *, unary -, and integer pow semantics.
template <class T, class LeafFn, class LitFn>
T eval_with(const NodeP& n, LeafFn&& leaf, LitFn&& lit) {
  switch (n->kind) {
    case ExprKind::Literal: return lit(n->lit);
    case ExprKind::Var: return leaf(VarRef{n->var, false});
    case ExprKind::BarVar: return leaf(VarRef{n->var, true});
    case ExprKind::Add: return eval_with<T>(n->a, leaf, lit) + eval_with<T>(n->b, leaf, lit);
    case ExprKind::Sub: return eval_with<T>(n->a, leaf, lit) - eval_with<T>(n->b, leaf, lit);
    case ExprKind::Mul: return eval_with<T>(n->a, leaf, lit) * eval_with<T>(n->b, leaf, lit);
    case ExprKind::Neg: return -eval_with<T>(n->a, leaf, lit);
    case ExprKind::Pow: {
      T base = eval_with<T>(n->a, leaf, lit);
      T acc = lit(CRational(1));
      int e = n->exponent;
      while (e > 0) {
        if (e & 1) acc = acc * base;
        if (e >>= 1) base = base * base;
      }
      return acc;
    }
    default: throw InternalError("eval on non-normalized node");
  }
}

/// Plain evaluation with zbar_k bound to conj(p_k).
inline std::complex<double> eval(const Expr& e, const std::vector<std::complex<double>>& p) {
  if (static_cast<int>(p.size()) != e.nvars()) {
    throw SpecError("eval: point dimension " + std::to_string(p.size()) +
                    " does not match variable count " + std::to_string(e.nvars()));
  }
  using C = std::complex<double>;
  return eval_with<C>(
      e.root(),
      [&](VarRef v) { return v.bar ? std::conj(p[v.index - 1]) : p[v.index - 1]; },
      [](const CRational& c) { return c.to_complex(); });
}

/// Exact symbolic partial derivative treating z_k and zbar_k as independent.
inline Expr wirtinger(const Expr& e, VarRef var) {
  if (var.index < 1 || var.index > e.nvars()) {
    throw SpecError("wirtinger: variable index out of range");
  }
  using detail::literal;
  using detail::mk_add;
  using detail::mk_mul;
  using detail::mk_neg;
  using detail::mk_pow;
  using detail::mk_sub;

  auto deriv = [&](auto&& self, const NodeP& n) -> NodeP {
    switch (n->kind) {
      case ExprKind::Literal: return literal(CRational(0));
      case ExprKind::Var:
        return literal(CRational(!var.bar && n->var == var.index ? 1 : 0));
      case ExprKind::BarVar:
        return literal(CRational(var.bar && n->var == var.index ? 1 : 0));
      case ExprKind::Add: return mk_add(self(self, n->a), self(self, n->b));
      case ExprKind::Sub: return mk_sub(self(self, n->a), self(self, n->b));
      case ExprKind::Mul:
        return mk_add(mk_mul(self(self, n->a), n->b), mk_mul(n->a, self(self, n->b)));
      case ExprKind::Neg: return mk_neg(self(self, n->a));
      case ExprKind::Pow:
        return mk_mul(mk_mul(literal(CRational(n->exponent)), mk_pow(n->a, n->exponent - 1)),
                      self(self, n->a));
      default: throw InternalError("wirtinger on non-normalized node");
    }
  };
  return Expr(deriv(deriv, e.root()), e.nvars(), e.names());
}

/// Randomized real-valuedness check: |Im e(p_t)| <= tol at sampled points.
/// Deterministic given the seed; samples the unit polydisc by default.
inline bool is_real_valued(const Expr& e, int trials = 16, double tol = 1e-9,
                           std::uint64_t seed = 0) {
  if (trials < 1) throw SpecError("is_real_valued: trials must be >= 1");
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ull);
  auto u = [&]() { return std::ldexp(static_cast<double>(gen() >> 11), -53) * 2.0 - 1.0; };
  std::vector<std::complex<double>> p(e.nvars());
  for (int t = 0; t < trials; ++t) {
    for (auto& z : p) z = {u(), u()};
    if (std::abs(eval(e, p).imag()) > tol) return false;
  }
  return true;
}

}  // namespace crnash
