#pragma once

#include <array>
#include <map>
#include <string>

#include "crnash/rational.hpp"

namespace crnash {

// Exact symbolic computation of the top Chern class obstruction
// c_{n+1}(L^n H^{01*} (x) L^n H^{01*} (x) S^n W) via the splitting principle,
// as a polynomial in h = c1(H^{01}), e1 = c1(W), e2 = c2(W).

/// Polynomial in the graded generators h, e1 (degree 1) and e2 (degree 2),
/// with exact rational coefficients. Keys are exponent triples (h, e1, e2).
class SymPoly {
 public:
  using Key = std::array<int, 3>;

  static SymPoly zero() { return SymPoly{}; }

  static SymPoly monomial(Rational c, int h, int e1, int e2) {
    SymPoly p;
    if (!c.is_zero()) p.terms_[{h, e1, e2}] = c;
    return p;
  }

  const std::map<Key, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Key& k, const Rational& c) {
    Rational& slot = terms_[k];
    slot += c;
    if (slot.is_zero()) terms_.erase(k);
  }

  friend SymPoly operator+(const SymPoly& a, const SymPoly& b) {
    SymPoly r = a;
    for (const auto& [k, c] : b.terms_) r.add_term(k, c);
    return r;
  }

  friend SymPoly operator*(const SymPoly& a, const SymPoly& b) {
    SymPoly r;
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) {
        r.add_term({ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]}, ca * cb);
      }
    return r;
  }

  Rational eval_at(const Rational& h, const Rational& e1, const Rational& e2) const {
    Rational s(0);
    for (const auto& [k, c] : terms_) {
      s += c * h.pow(k[0]) * e1.pow(k[1]) * e2.pow(k[2]);
    }
    return s;
  }

  /// Homogeneous under deg h = deg e1 = 1, deg e2 = 2; -1 when empty.
  int homogeneous_degree() const {
    int d = -1;
    for (const auto& [k, c] : terms_) {
      int t = k[0] + k[1] + 2 * k[2];
      if (d == -1) d = t;
      if (t != d) return -2;  // not homogeneous
    }
    return d;
  }

 private:
  std::map<Key, Rational> terms_;
};

namespace detail {

/// Dense-enough polynomial in the formal Chern roots (h, a, b).
using RootPoly = std::map<std::array<int, 3>, Rational>;

inline void root_add(RootPoly& p, const std::array<int, 3>& k, const Rational& c) {
  Rational& slot = p[k];
  slot += c;
  if (slot.is_zero()) p.erase(k);
}

inline RootPoly root_mul(const RootPoly& x, const RootPoly& y) {
  RootPoly r;
  for (const auto& [kx, cx] : x)
    for (const auto& [ky, cy] : y) {
      root_add(r, {kx[0] + ky[0], kx[1] + ky[1], kx[2] + ky[2]}, cx * cy);
    }
  return r;
}

inline long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - j + 1) / j;
  return r;
}

/// Rewrites an (a, b)-symmetric polynomial in e1 = a+b, e2 = ab by repeated
/// leading-term subtraction; throws when a non-symmetric remainder survives.
inline SymPoly reduce_symmetric(RootPoly q, int h_exp) {
  SymPoly out;
  while (!q.empty()) {
    // lexicographic leading term in (a, b)
    auto lead = q.begin();
    for (auto it = q.begin(); it != q.end(); ++it) {
      if (it->first[1] > lead->first[1] ||
          (it->first[1] == lead->first[1] && it->first[2] > lead->first[2])) {
        lead = it;
      }
    }
    int alpha = lead->first[1], beta = lead->first[2];
    Rational c = lead->second;
    if (alpha < beta) {
      throw InternalError("obstruction_class: asymmetric remainder in the (a, b) reduction");
    }
    out.add_term({h_exp, alpha - beta, beta}, c);
    // subtract c * (a+b)^(alpha-beta) * (ab)^beta
    for (int t = 0; t <= alpha - beta; ++t) {
      Rational coeff = c * Rational(binomial(alpha - beta, t));
      root_add(q, {0, alpha - beta - t + beta, t + beta}, -coeff);
    }
  }
  return out;
}

}  // namespace detail

inline constexpr int kMaxObstructionOrder = 12;

/// Top Chern class of L^n H^{01*} (x) L^n H^{01*} (x) S^n W as an exact
/// polynomial in (h, e1, e2): the bundle has Chern roots
/// -2h + k a + (n-k) b, k = 0..n, and the product expands symmetrically in
/// the roots (a, b) of W. For n = 0 every factor is trivial and the class
/// vanishes.
inline SymPoly obstruction_class(int n) {
  if (n < 0) throw SpecError("obstruction_class: n must be >= 0");
  if (n > kMaxObstructionOrder) {
    throw SpecError("obstruction_class: n exceeds the guard of " +
                    std::to_string(kMaxObstructionOrder));
  }
  if (n == 0) return SymPoly::zero();

  detail::RootPoly prod;
  detail::root_add(prod, {0, 0, 0}, Rational(1));
  for (int k = 0; k <= n; ++k) {
    detail::RootPoly factor;
    detail::root_add(factor, {1, 0, 0}, Rational(-2));       // -2h
    if (k > 0) detail::root_add(factor, {0, 1, 0}, Rational(k));        // k a
    if (n - k > 0) detail::root_add(factor, {0, 0, 1}, Rational(n - k)); // (n-k) b
    prod = detail::root_mul(prod, factor);
  }

  // group by h exponent and reduce each symmetric (a, b) slice
  std::map<int, detail::RootPoly> slices;
  for (const auto& [k, c] : prod) {
    detail::root_add(slices[k[0]], {0, k[1], k[2]}, c);
  }
  SymPoly out;
  for (auto& [h_exp, slice] : slices) {
    out = out + detail::reduce_symmetric(std::move(slice), h_exp);
  }
  if (out.homogeneous_degree() != n + 1) {
    throw InternalError("obstruction_class: result is not homogeneous of degree n+1");
  }
  return out;
}

/// Canonical text form, monomials ordered by descending (h, e1, e2)
/// exponents: e.g. "4*h^2 - 2*h*e1 + e2".
inline std::string to_string(const SymPoly& p) {
  if (p.is_zero()) return "0";
  std::string s;
  // iterate in descending key order
  const auto& terms = p.terms();
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
    Rational c = it->second;
    bool neg = c < Rational(0);
    if (s.empty()) {
      if (neg) s += "-";
    } else {
      s += neg ? " - " : " + ";
    }
    if (neg) c = Rational(0) - c;
    std::string mono;
    auto append = [&mono](const std::string& gen, int e) {
      if (e == 0) return;
      if (!mono.empty()) mono += "*";
      mono += gen;
      if (e > 1) mono += "^" + std::to_string(e);
    };
    append("h", it->first[0]);
    append("e1", it->first[1]);
    append("e2", it->first[2]);
    if (mono.empty()) {
      s += c.to_string();
    } else if (c == Rational(1)) {
      s += mono;
    } else {
      s += c.to_string() + "*" + mono;
    }
  }
  return s;
}

}  // namespace crnash
