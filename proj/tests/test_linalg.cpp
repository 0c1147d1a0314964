#include <catch2/catch_amalgamated.hpp>

#include "crnash/linalg.hpp"
#include "crnash/rng.hpp"

using namespace crnash;

namespace {
CMat from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
  int r = static_cast<int>(rows.size());
  int c = static_cast<int>(rows.begin()->size());
  CMat m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (cplx v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}
}  // namespace

TEST_CASE("wedge on standard examples") {
  TwoForm w = wedge({cplx{1, 0}, cplx{0, 0}}, {cplx{0, 0}, cplx{1, 0}});
  REQUIRE(std::abs(w.at(0, 1) - cplx{1, 0}) < 1e-15);

  TwoForm w2 = wedge({cplx{1, 0}, cplx{1, 0}}, {cplx{1, 0}, cplx{-1, 0}});
  REQUIRE(std::abs(w2.at(0, 1) - cplx{-2, 0}) < 1e-15);

  CVec u = {cplx{0.3, 1.2}, cplx{-0.4, 0.9}};
  TwoForm w3 = wedge(u, u);
  REQUIRE(w3.frobenius_norm() < 1e-15);

  REQUIRE_THROWS_AS(wedge(u, CVec{cplx{1, 0}}), SpecError);
}

TEST_CASE("wedge is bilinear and alternating") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    CVec u = rng.complex_unit(4), v = rng.complex_unit(4), u2 = rng.complex_unit(4);
    TwoForm a = wedge(u, v), b = wedge(v, u);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        REQUIRE(std::abs(a.at(i, j) + b.at(i, j)) < 1e-12);
      }
    CVec sum(4);
    for (int k = 0; k < 4; ++k) sum[k] = u[k] + u2[k];
    TwoForm lhs = wedge(sum, v), r1 = wedge(u, v), r2 = wedge(u2, v);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        REQUIRE(std::abs(lhs.at(i, j) - r1.at(i, j) - r2.at(i, j)) < 1e-12);
      }
  }
}

TEST_CASE("rank on the gauge matrix and degenerate cases") {
  CMat gauge = from_rows({{cplx{1, 0}, cplx{1, 0}}, {cplx{0, 1}, cplx{0, -1}}});
  REQUIRE(rank(gauge, 1e-8) == 2);

  CMat prop = from_rows({{cplx{1, 0}, cplx{2, 0}}, {cplx{2, 0}, cplx{4, 0}}});
  REQUIRE(rank(prop, 1e-8) == 1);

  CMat zero(3, 3);
  REQUIRE(rank(zero, 1e-8) == 0);
  REQUIRE_THROWS_AS(rank(CMat{}, 1e-8), SpecError);
}

TEST_CASE("rank is invariant under row permutation and scaling") {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    CMat m(3, 4);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) m(r, c) = rng.complex_normal();
    int base = rank(m, 1e-8);
    CMat swapped = m;
    for (int c = 0; c < 4; ++c) std::swap(swapped(0, c), swapped(2, c));
    REQUIRE(rank(swapped, 1e-8) == base);
    CMat scaled = m;
    for (int c = 0; c < 4; ++c) scaled(1, c) *= cplx{0, 3.7};
    REQUIRE(rank(scaled, 1e-8) == base);
  }
}

TEST_CASE("determinants of small matrices") {
  CMat gauge = from_rows({{cplx{1, 0}, cplx{1, 0}}, {cplx{0, 1}, cplx{0, -1}}});
  REQUIRE(std::abs(det(gauge) - cplx{0, -2}) < 1e-14);
  REQUIRE(std::abs(det(CMat::identity(5)) - cplx{1, 0}) < 1e-14);
  CMat d(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 3;
  REQUIRE(std::abs(det(d) - cplx{6, 0}) < 1e-14);
}

TEST_CASE("det is multiplicative on random 3x3 pairs") {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    CMat a(3, 3), b(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        a(r, c) = rng.complex_normal();
        b(r, c) = rng.complex_normal();
      }
    cplx lhs = det(a * b);
    cplx rhs = det(a) * det(b);
    REQUIRE(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("least squares basics") {
  RMat id = RMat::identity(3);
  RVec b = {1.5, -2.0, 0.25};
  RVec x = least_squares(id, b);
  for (int k = 0; k < 3; ++k) REQUIRE(std::abs(x[k] - b[k]) < 1e-14);

  // overdetermined consistent system
  RMat a(3, 2);
  a(0, 0) = 1;
  a(1, 1) = 1;
  a(2, 0) = 1;
  a(2, 1) = 1;
  RVec rhs = {2.0, 3.0, 5.0};
  RVec sol = least_squares(a, rhs);
  REQUIRE(std::abs(sol[0] - 2.0) < 1e-12);
  REQUIRE(std::abs(sol[1] - 3.0) < 1e-12);

  RMat mean(2, 1);
  mean(0, 0) = 1;
  mean(1, 0) = 1;
  REQUIRE(std::abs(least_squares(mean, {0.0, 2.0})[0] - 1.0) < 1e-14);

  RMat zero_col(2, 2);
  zero_col(0, 0) = 1;
  zero_col(1, 0) = 2;
  REQUIRE_THROWS_AS(least_squares(zero_col, {1.0, 1.0}), NumericalError);
}

TEST_CASE("unitary_complete aligns the last column") {
  // already aligned
  CMat u1 = unitary_complete({cplx{0, 0}, cplx{1, 0}});
  REQUIRE(std::abs(u1(0, 0) - cplx{1, 0}) < 1e-14);
  REQUIRE(std::abs(u1(1, 1) - cplx{1, 0}) < 1e-14);

  // swap up to phases
  CMat u2 = unitary_complete({cplx{1, 0}, cplx{0, 0}});
  REQUIRE(std::abs(u2(0, 1) - cplx{1, 0}) < 1e-14);
  REQUIRE(std::abs(std::abs(u2(1, 0)) - 1.0) < 1e-14);

  REQUIRE_THROWS_AS(unitary_complete(CVec{cplx{0, 0}}), SpecError);
}

TEST_CASE("unitary_complete against a Gram-Schmidt oracle") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    int d = 2 + t % 4;
    CVec v = rng.complex_unit(d);
    CMat u = unitary_complete(v);
    // last column proportional to v
    REQUIRE(projective_distance(u.col(d - 1), v) < 1e-12);
    // unitarity residual
    CMat gram = u.adjoint() * u;
    REQUIRE((gram - CMat::identity(d)).max_abs() < 1e-10);
    // |det| = 1
    REQUIRE(std::abs(std::abs(det(u)) - 1.0) < 1e-9);
    // the first d-1 columns span the same complement as a Gram-Schmidt
    // construction over {v, e_1, .., e_d}
    std::vector<CVec> gs = {v};
    for (int j = 0; j < d; ++j) {
      CVec e(d, cplx{});
      e[j] = 1;
      gs.push_back(e);
    }
    auto ortho = hermitian_orthonormalize(gs);
    REQUIRE(static_cast<int>(ortho.size()) == d);
    // projector difference between both complements of span{v}
    CMat p1(d, d), p2(d, d);
    for (int c = 0; c + 1 < d; ++c) {
      for (int r1 = 0; r1 < d; ++r1)
        for (int r2 = 0; r2 < d; ++r2) {
          p1(r1, r2) += u(r1, c) * std::conj(u(r2, c));
          p2(r1, r2) += ortho[c + 1][r1] * std::conj(ortho[c + 1][r2]);
        }
    }
    REQUIRE((p1 - p2).max_abs() < 1e-9);
  }
}

TEST_CASE("kernel basis annihilates the rows") {
  Rng rng(33);
  for (int t = 0; t < 10; ++t) {
    CMat a(2, 5);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 5; ++c) a(r, c) = rng.complex_normal();
    auto kb = kernel_basis(a);
    REQUIRE(kb.size() == 3);
    for (const auto& v : kb) {
      for (int r = 0; r < 2; ++r) {
        cplx s = 0;
        for (int c = 0; c < 5; ++c) s += a(r, c) * v[c];
        REQUIRE(std::abs(s) < 1e-10);
      }
    }
  }
}

TEST_CASE("canonical subspace frame is deterministic and canonical") {
  Rng rng(41);
  CVec s = rng.complex_unit(3);
  auto f1 = canonical_subspace_frame({s});
  CVec scaled = s;
  for (auto& z : scaled) z *= cplx{0.3, -0.8};  // same line, different representative
  auto f2 = canonical_subspace_frame({scaled});
  REQUIRE(f1.size() == 1);
  REQUIRE(f2.size() == 1);
  for (int k = 0; k < 3; ++k) REQUIRE(std::abs(f1[0][k] - f2[0][k]) < 1e-12);
}
