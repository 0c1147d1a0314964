#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace crnash;
using testutil::fd_wirtinger1;
using testutil::fd_wirtinger2;
using testutil::random_point;
using testutil::random_polynomial;

namespace {
const std::vector<std::string> kZW = {"z1", "w"};

MIdx idx_of(std::initializer_list<std::pair<int, int>> entries) {
  MIdx m{};
  for (auto [slot, e] : entries) m[slot] = static_cast<std::uint8_t>(e);
  return m;
}
}  // namespace

TEST_CASE("mixed |z|^2 coefficient is 1") {
  Expr e = parse("z1*conj(z1)", kZW);
  Jet j = eval_jet(e, {cplx{0.3, -0.2}, cplx{0, 0}}, 2);
  // slots: z1 = 0, w = 1, zbar1 = 2, wbar = 3
  REQUIRE(std::abs(j.coef(idx_of({{0, 1}, {2, 1}})) - cplx{1, 0}) < 1e-14);
  REQUIRE(std::abs(j.d2(0, 2) - cplx{1, 0}) < 1e-14);
}

TEST_CASE("antiholomorphic monomial at the origin") {
  Expr e = parse("conj(z1)^2", kZW);
  Jet j = eval_jet(e, {cplx{0, 0}, cplx{0, 0}}, 2);
  int nonzero = 0;
  for (const auto& [m, v] : j.coefficients()) {
    if (std::abs(v) > 1e-15) ++nonzero;
  }
  REQUIRE(nonzero == 1);
  REQUIRE(std::abs(j.coef(idx_of({{2, 2}})) - cplx{1, 0}) < 1e-14);
}

TEST_CASE("first-order data of the rotated graph defining function") {
  Expr e = parse("re(w - conj(z1)^2)", kZW);
  Jet j = eval_jet(e, {cplx{0, 0}, cplx{0, 0}}, 1);
  REQUIRE(std::abs(j.d1(0)) < 1e-15);                  // d/dz1 = 0 at 0
  REQUIRE(std::abs(j.d1(1) - cplx{0.5, 0}) < 1e-15);   // d/dw = 1/2
}

TEST_CASE("degree-0 coefficient equals plain evaluation") {
  Rng rng(11);
  std::vector<std::string> vars = {"z1", "z2"};
  for (int t = 0; t < 10; ++t) {
    Expr e = parse(random_polynomial(rng, vars), vars);
    CVec p = random_point(rng, 2);
    Jet j = eval_jet(e, p, 2);
    REQUIRE(std::abs(j.value() - eval(e, p)) < 1e-12);
  }
}

TEST_CASE("order guard and dimension mismatch fail") {
  Expr e = parse("z1", kZW);
  REQUIRE_THROWS_AS(eval_jet(e, {cplx{0, 0}, cplx{0, 0}}, 4), SpecError);
  REQUIRE_THROWS_AS(eval_jet(e, {cplx{0, 0}}, 1), SpecError);
}

TEST_CASE("jet coefficients satisfy the reality symmetry for real exprs") {
  Rng rng(5);
  std::vector<std::string> vars = {"z1", "z2"};
  for (int t = 0; t < 12; ++t) {
    // E + conj(E) is real-valued by construction
    std::string g = random_polynomial(rng, vars, 3, 3);
    Expr e = parse("(" + g + ") + conj(" + g + ")", vars);
    CVec p = random_point(rng, 2);
    Jet j = eval_jet(e, p, 2);
    const int m = 2;
    for (const auto& [midx, v] : j.coefficients()) {
      MIdx swapped{};
      for (int k = 0; k < m; ++k) {
        swapped[k] = midx[m + k];
        swapped[m + k] = midx[k];
      }
      REQUIRE(std::abs(v - std::conj(j.coef(swapped))) < 1e-12);
    }
  }
}

TEST_CASE("jets agree with symbolic wirtinger derivatives exactly") {
  Rng rng(13);
  std::vector<std::string> vars = {"z1", "z2", "z3"};
  for (int t = 0; t < 25; ++t) {
    Expr e = parse(random_polynomial(rng, vars), vars);
    CVec p = random_point(rng, 3);
    Jet j = eval_jet(e, p, 2);
    for (int k = 0; k < 3; ++k) {
      for (bool bar : {false, true}) {
        Expr d = wirtinger(e, {k + 1, bar});
        cplx want = eval(d, p);
        cplx got = j.d1(bar ? 3 + k : k);
        REQUIRE(std::abs(got - want) < 1e-12 * std::max(1.0, std::abs(want)));
        // second order, mixed with z1
        Expr d2 = wirtinger(d, {1, false});
        cplx want2 = eval(d2, p);
        cplx got2 = j.d2(0, bar ? 3 + k : k);
        REQUIRE(std::abs(got2 - want2) < 1e-12 * std::max(1.0, std::abs(want2)));
      }
    }
  }
}

TEST_CASE("jets agree with central finite differences") {
  Rng rng(17);
  std::vector<std::string> vars = {"z1", "z2"};
  for (int t = 0; t < 15; ++t) {
    Expr e = parse(random_polynomial(rng, vars), vars);
    CVec p = random_point(rng, 2);
    Jet j = eval_jet(e, p, 2);
    for (int k = 0; k < 2; ++k) {
      for (bool bar : {false, true}) {
        cplx fd = fd_wirtinger1(e, p, k, bar);
        cplx got = j.d1(bar ? 2 + k : k);
        REQUIRE(std::abs(got - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
      }
      for (int l = 0; l < 2; ++l) {
        cplx fd = fd_wirtinger2(e, p, k, l);
        cplx got = j.d2(k, 2 + l);
        REQUIRE(std::abs(got - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("frame-seeded jets implement the chain rule through a unitary") {
  // rho(z) pulled through z = U zeta: compare against evaluating on shifted
  // points directly.
  Expr e = parse("re(w - conj(z1)^2)", kZW);
  CVec base = {cplx{0.1, 0.05}, cplx{-0.2, 0.3}};
  CMat u = unitary_complete({cplx{0.6, 0.3}, cplx{0.2, -0.7}});
  auto uf = [&](int r, int c) { return u(r, c); };
  Jet j = eval_jet_frame(e, base, uf, 1);
  // compare d/d zeta_k with a finite difference along the frame column
  for (int k = 0; k < 2; ++k) {
    double h = 1e-6;
    CVec plus = base, minus = base;
    for (int r = 0; r < 2; ++r) {
      plus[r] += h * u(r, k);
      minus[r] -= h * u(r, k);
    }
    cplx dx = (eval(e, plus) - eval(e, minus)) / (2 * h);
    CVec plus_i = base, minus_i = base;
    for (int r = 0; r < 2; ++r) {
      plus_i[r] += cplx{0, h} * u(r, k);
      minus_i[r] -= cplx{0, h} * u(r, k);
    }
    cplx dy = (eval(e, plus_i) - eval(e, minus_i)) / (2 * h);
    cplx want = 0.5 * (dx - cplx{0, 1} * dy);
    REQUIRE(std::abs(j.d1(k) - want) < 1e-8);
  }
}
