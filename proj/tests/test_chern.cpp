#include <catch2/catch_amalgamated.hpp>

#include "crnash/chern.hpp"

using namespace crnash;

namespace {

/// Brute-force oracle: evaluate the root product prod_{k=0}^{n}
/// (-2h + k a + (n-k) b) directly in exact rationals, no symmetric
/// reduction involved.
Rational root_product(int n, const Rational& h, const Rational& a, const Rational& b) {
  Rational prod(1);
  for (int k = 0; k <= n; ++k) {
    prod *= Rational(-2) * h + Rational(k) * a + Rational(n - k) * b;
  }
  return prod;
}

SymPoly expected_n1() {
  SymPoly p;
  p.add_term({2, 0, 0}, Rational(4));
  p.add_term({1, 1, 0}, Rational(-2));
  p.add_term({0, 0, 1}, Rational(1));
  return p;
}

// frozen from the independent root-expansion oracle
SymPoly expected_n2() {
  SymPoly p;
  p.add_term({3, 0, 0}, Rational(-8));
  p.add_term({2, 1, 0}, Rational(12));
  p.add_term({1, 2, 0}, Rational(-4));
  p.add_term({1, 0, 1}, Rational(-8));
  p.add_term({0, 1, 1}, Rational(4));
  return p;
}

}  // namespace

TEST_CASE("rational arithmetic basics") {
  REQUIRE(Rational::from_decimal("12.345") == Rational(12345, 1000));
  REQUIRE(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  REQUIRE(Rational(2, 4) == Rational(1, 2));
  REQUIRE(Rational(-3, 7).pow(2) == Rational(9, 49));
  REQUIRE((Rational(1, 3) * Rational(3)) == Rational(1));
  REQUIRE_THROWS_AS(Rational(1, 0), InternalError);
}

TEST_CASE("obstruction class for n = 0 is zero") {
  auto p = obstruction_class(0);
  REQUIRE(p.is_zero());
  REQUIRE(to_string(p) == "0");
  REQUIRE(p.eval_at(Rational(3), Rational(5), Rational(7)) == Rational(0));
}

TEST_CASE("obstruction class for n = 1 is exact") {
  auto p = obstruction_class(1);
  REQUIRE(p.terms() == expected_n1().terms());
  REQUIRE(to_string(p) == "4*h^2 - 2*h*e1 + e2");
  REQUIRE(p.eval_at(Rational(1), Rational(0), Rational(0)) == Rational(4));
  REQUIRE(p.eval_at(Rational(0), Rational(0), Rational(1)) == Rational(1));
  REQUIRE(p.eval_at(Rational(0), Rational(0), Rational(0)) == Rational(0));
}

TEST_CASE("obstruction class for n = 2 matches the frozen oracle expansion") {
  REQUIRE(obstruction_class(2).terms() == expected_n2().terms());
}

TEST_CASE("obstruction classes agree with the root-product oracle for n <= 4") {
  for (int n = 1; n <= 4; ++n) {
    auto p = obstruction_class(n);
    // polynomial identity testing on an integer grid larger than the degree
    for (int h = 0; h <= n + 2; ++h)
      for (int a = 0; a <= n + 2; ++a)
        for (int b = 0; b <= n + 2; ++b) {
          Rational lhs = p.eval_at(Rational(h), Rational(a + b), Rational(a * b));
          Rational rhs = root_product(n, Rational(h), Rational(a), Rational(b));
          REQUIRE(lhs == rhs);
        }
  }
}

TEST_CASE("obstruction class is homogeneous of degree n + 1") {
  for (int n = 1; n <= 5; ++n) {
    REQUIRE(obstruction_class(n).homogeneous_degree() == n + 1);
  }
}

TEST_CASE("equal-roots substitution collapses to (-2h + n u)^{n+1}") {
  for (int n = 1; n <= 5; ++n) {
    auto p = obstruction_class(n);
    // substitute e1 = 2u, e2 = u^2; collect exponents of (h, u)
    std::map<std::array<int, 2>, Rational> got;
    for (const auto& [k, c] : p.terms()) {
      std::array<int, 2> key = {k[0], k[1] + 2 * k[2]};
      Rational v = c * Rational(2).pow(k[1]);
      auto it = got.find(key);
      if (it == got.end()) {
        if (!v.is_zero()) got[key] = v;
      } else {
        it->second += v;
        if (it->second.is_zero()) got.erase(it);
      }
    }
    // binomial expansion of (-2h + n u)^{n+1}
    std::map<std::array<int, 2>, Rational> want;
    Rational binom(1);
    for (int t = 0; t <= n + 1; ++t) {
      Rational coeff = binom * Rational(-2).pow(n + 1 - t) * Rational(n).pow(t);
      if (!coeff.is_zero()) want[{n + 1 - t, t}] = coeff;
      binom = binom * Rational(n + 1 - t) / Rational(t + 1);
    }
    REQUIRE(got == want);
  }
}

TEST_CASE("h = 0 leaves the top Chern class of S^n W") {
  auto p = obstruction_class(1);
  // drop h-terms: the remainder must be exactly e2
  SymPoly slice;
  for (const auto& [k, c] : p.terms()) {
    if (k[0] == 0) slice.add_term(k, c);
  }
  SymPoly want;
  want.add_term({0, 0, 1}, Rational(1));
  REQUIRE(slice.terms() == want.terms());

  for (int n = 2; n <= 4; ++n) {
    auto pn = obstruction_class(n);
    for (int a = 0; a <= n + 2; ++a)
      for (int b = 0; b <= n + 2; ++b) {
        Rational lhs = pn.eval_at(Rational(0), Rational(a + b), Rational(a * b));
        REQUIRE(lhs == root_product(n, Rational(0), Rational(a), Rational(b)));
      }
  }
}

TEST_CASE("order guard") {
  REQUIRE_THROWS_AS(obstruction_class(13), SpecError);
  REQUIRE_THROWS_AS(obstruction_class(-1), SpecError);
  REQUIRE_NOTHROW(obstruction_class(12));
}
