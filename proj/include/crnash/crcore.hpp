#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "crnash/manifold.hpp"

namespace crnash {

// Complex tangent spaces, jump detection, the dual Gauss map in Plucker
// coordinates, the transversality certificate, the Levi form (including its
// extension to the blow-up), and the Mizner determinant polynomial.

struct ComplexTangent {
  SurfacePoint base;
  std::vector<CVec> basis;  // orthonormal (1,0) vectors annihilated by d rho
  int cdim = 0;             // n at CR points, n+1 at jump points
};

struct PluckerPoint {
  CVec u_hol;     // u_{k,n+2}
  CVec u_mixed1;  // u_{k,nbar+2}
  CVec u_mixed2;  // u_{kbar,n+2}
  CVec u_anti;    // u_{kbar,nbar+2}
  cplx gauge_scale{};  // factor normalizing the (n+2, nbar+2) minor to det [[1,1],[i,-i]]
  CMat frame;          // chart unitary the blocks are expressed in
};

struct JumpPoint {
  SurfacePoint point;
  double wedge_norm = 0;  // Frobenius norm of d rho1 ^ d rho2 (z-part)
  bool transverse = false;
  RMat jacobian;  // real (2n+2) x (2n+2) Jacobian of the chart wedge map
  int index = 0;  // sign(det jacobian) when transverse
  double condition = std::numeric_limits<double>::infinity();
};

struct LeviPair {
  CVec base;
  CMat l1, l2;                        // n x n Hermitian
  std::vector<CVec> h_frame;          // basis of H^{10} the matrices refer to
  std::array<CVec, 2> normal_frame;   // orthonormalized complex normals
  RMat remix;                         // 2x2 real mixing applied to (rho1, rho2)
};

/// Coefficients c_0..c_n of P(x, y) = sum c_j x^{n-j} y^j.
struct MiznerPoly {
  std::vector<double> coef;

  int degree() const { return static_cast<int>(coef.size()) - 1; }
  double eval(double x, double y) const {
    double s = 0;
    const int n = degree();
    for (int j = 0; j <= n; ++j) s += coef[j] * std::pow(x, n - j) * std::pow(y, j);
    return s;
  }
  double max_abs() const {
    double s = 0;
    for (double c : coef) s = std::max(s, std::abs(c));
    return s;
  }
};

struct Nondegeneracy {
  bool independent = false;
  bool common_kernel = false;
  bool nondegenerate = false;
};

// --- jump detection ---

/// The (2,0) part of d rho1 ^ d rho2: lambda_{ab} = W1_a W2_b - W1_b W2_a.
inline TwoForm jump_indicator(const ManifoldSpec& spec, const SurfacePoint& p) {
  CVec w1 = holomorphic_partials(spec.rho1, p.coords);
  CVec w2 = holomorphic_partials(spec.rho2, p.coords);
  return wedge(w1, w2);
}

/// Product of first-derivative norms; the natural scale of the indicator.
inline double derivative_scale(const ManifoldSpec& spec, const CVec& p) {
  return norm2(holomorphic_partials(spec.rho1, p)) *
         norm2(holomorphic_partials(spec.rho2, p));
}

inline bool is_jump(const ManifoldSpec& spec, const SurfacePoint& p,
                    double tol = kJumpIndicatorTol) {
  double scale = derivative_scale(spec, p.coords);
  if (scale == 0) throw SpecError("is_jump: a differential vanishes (non-regular point)");
  return jump_indicator(spec, p).frobenius_norm() <= tol * scale;
}

inline ComplexTangent complex_tangent(const ManifoldSpec& spec, const SurfacePoint& p) {
  const int m = spec.ambient_dim();
  CVec w1 = holomorphic_partials(spec.rho1, p.coords);
  CVec w2 = holomorphic_partials(spec.rho2, p.coords);
  CMat a(2, m);
  for (int k = 0; k < m; ++k) {
    a(0, k) = w1[k];
    a(1, k) = w2[k];
  }
  int r = rank(a, spec.tol.rank);
  auto conj_vec = [](CVec v) {
    for (auto& z : v) z = std::conj(z);
    return v;
  };
  auto rows = hermitian_orthonormalize({conj_vec(w1), conj_vec(w2)});
  if (static_cast<int>(rows.size()) > r) rows.resize(r);
  ComplexTangent ct;
  ct.base = p;
  ct.cdim = m - r;
  ct.basis = canonical_subspace_frame(hermitian_complement(rows, m));
  return ct;
}

// --- chart-frame wedge map and its Jacobian ---

namespace detail {

/// Values and first derivatives, at the chart origin, of the chart-frame
/// wedge coefficients lambda_k = (d rho1 ^ d rho2)_{k, n+2}, k = 1..n+1.
/// Returns the values lambda_k(0) and the complex Jacobian rows A with
/// A(k, a) = d lambda_k / d u_a for the blocked chart parameters
/// u = (Re zeta_1.., Im zeta_1..). At a jump base the fiber coordinate is
/// second order in u, so only the in-chart slots contribute.
struct ChartWedgeData {
  CVec values;  // length n+1
  CMat jac;     // (n+1) x (2n+2) complex
};

inline ChartWedgeData chart_wedge_block(const ManifoldSpec& spec, const Chart& chart) {
  const int m = spec.ambient_dim();
  const int np1 = spec.n + 1;
  auto uf = [&](int j, int k) { return chart.frame(j, k); };
  Jet r1 = eval_jet_frame(spec.rho1, chart.base.coords, uf, 2);
  Jet r2 = eval_jet_frame(spec.rho2, chart.base.coords, uf, 2);

  std::vector<Jet> v(m), w(m);
  for (int k = 0; k < m; ++k) {
    v[k] = r1.partial(k);
    w[k] = r2.partial(k);
  }

  ChartWedgeData out;
  out.values.resize(np1);
  out.jac = CMat(np1, 2 * np1);
  const cplx iu{0.0, 1.0};
  for (int k = 0; k < np1; ++k) {
    Jet lam = v[k] * w[m - 1] - v[m - 1] * w[k];
    out.values[k] = lam.value();
    for (int a = 0; a < np1; ++a) {
      cplx dz = lam.d1(a);
      cplx dzb = lam.d1(m + a);
      out.jac(k, a) = dz + dzb;             // d/d Re zeta_a
      out.jac(k, np1 + a) = iu * (dz - dzb);  // d/d Im zeta_a
    }
  }
  return out;
}

inline RMat realify_rows(const CMat& a) {
  RMat r(2 * a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      r(i, j) = a(i, j).real();
      r(a.rows() + i, j) = a(i, j).imag();
    }
  return r;
}

/// Natural magnitude of the wedge-map Jacobian entries at the chart base:
/// first-derivative norm times the norm of the order-2..3 chart jet
/// coefficients (box coordinates are the unit of length). Near a degenerate
/// jump the Jacobian entries collapse while this scale stays put, which is
/// what lets the certificate reject them.
inline double wedge_jacobian_scale(const ManifoldSpec& spec, const Chart& chart) {
  auto uf = [&](int j, int k) { return chart.frame(j, k); };
  double s1 = 0, s_high = 0;
  for (const Expr* e : {&spec.rho1, &spec.rho2}) {
    Jet jet = eval_jet_frame(*e, chart.base.coords, uf, 3);
    double o1 = 0, o23 = 0;
    for (const auto& [m, v] : jet.coefficients()) {
      int deg = midx_degree(m);
      if (deg == 1) o1 += std::norm(v);
      if (deg >= 2) o23 += std::norm(v);
    }
    s1 = std::max(s1, std::sqrt(o1));
    s_high = std::max(s_high, std::sqrt(o23));
  }
  return s1 * s_high;
}

/// Full-rank test for the realified wedge Jacobian against the external
/// entry scale: all pivots present and the smallest one above
/// tol * max(largest pivot, entry scale).
inline bool certify_full_rank(const RMat& a, double entry_scale, double tol) {
  if (a.rows() == 0 || a.max_abs() == 0) return false;
  auto pivots = elimination_pivots(a);
  if (static_cast<int>(pivots.size()) != a.rows()) return false;
  return pivots.back() > tol * std::max(pivots.front(), entry_scale);
}

}  // namespace detail

/// Fills the transversality certificate: the real Jacobian at the jump of
/// the chart-frame wedge map u -> lambda(chart(u)), its invertibility, the
/// sign of its determinant, and a pivot-ratio conditioning estimate.
inline JumpPoint transversality(const ManifoldSpec& spec, JumpPoint j) {
  Chart chart = graph_chart(spec, j.point);
  auto data = detail::chart_wedge_block(spec, chart);
  j.jacobian = detail::realify_rows(data.jac);
  double d = det(j.jacobian);
  double entry_scale = detail::wedge_jacobian_scale(spec, chart);
  j.transverse = detail::certify_full_rank(j.jacobian, entry_scale, spec.tol.rank);
  j.index = d > 0 ? 1 : (d < 0 ? -1 : 0);
  j.condition = pivot_condition(j.jacobian);
  return j;
}

inline int signed_index(const JumpPoint& j) {
  if (!j.transverse) {
    throw SpecError("signed_index: jump point is not transverse");
  }
  return j.index;
}

/// Classify (and certify) an ambient point as a jump point of the spec.
inline JumpPoint make_jump_point(const ManifoldSpec& spec, const CVec& coords,
                                 double tol = kJumpIndicatorTol) {
  SurfacePoint p = project_to_surface(spec, coords);
  if (!is_jump(spec, p, tol)) {
    throw SpecError("make_jump_point: point is not a complex jump point");
  }
  JumpPoint j;
  j.point = p;
  j.wedge_norm = jump_indicator(spec, p).frobenius_norm();
  return transversality(spec, j);
}

// --- jump search ---

inline constexpr double kJumpDedupRadius = 1e-6;

namespace detail {

inline double ambient_distance(const CVec& a, const CVec& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::norm(a[k] - b[k]);
  return std::sqrt(s);
}

inline bool coords_less(const CVec& a, const CVec& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].real() != b[k].real()) return a[k].real() < b[k].real();
    if (a[k].imag() != b[k].imag()) return a[k].imag() < b[k].imag();
  }
  return false;
}

/// Damped Gauss-Newton on the augmented residual (rho1, rho2, all wedge
/// coefficients). Returns the refined point; convergence is judged by the
/// caller from the residuals.
inline CVec refine_jump(const ManifoldSpec& spec, CVec p, int max_iter = 70) {
  const int m = spec.ambient_dim();
  const int pairs = m * (m - 1) / 2;

  auto residual = [&](const CVec& q, RVec* out_f) {
    Jet j1 = eval_jet(spec.rho1, q, 1);
    Jet j2 = eval_jet(spec.rho2, q, 1);
    CVec w1(m), w2(m);
    for (int k = 0; k < m; ++k) {
      w1[k] = j1.d1(k);
      w2[k] = j2.d1(k);
    }
    RVec f(2 + 2 * pairs);
    f[0] = j1.value().real();
    f[1] = j2.value().real();
    int idx = 0;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b, ++idx) {
        cplx lam = w1[a] * w2[b] - w1[b] * w2[a];
        f[2 + 2 * idx] = lam.real();
        f[3 + 2 * idx] = lam.imag();
      }
    if (out_f) *out_f = f;
    return norm2(f);
  };

  RVec f;
  double res = residual(p, &f);
  // degenerate indicator zeros converge only linearly; iterate to the stall
  for (int iter = 0; iter < max_iter && res > 0; ++iter) {
    Jet j1 = eval_jet(spec.rho1, p, 2);
    Jet j2 = eval_jet(spec.rho2, p, 2);
    std::vector<Jet> v(m), w(m);
    for (int k = 0; k < m; ++k) {
      v[k] = j1.partial(k);
      w[k] = j2.partial(k);
    }
    RMat jac(2 + 2 * pairs, 2 * m);
    for (int c = 0; c < m; ++c) {
      jac(0, c) = 2 * j1.d1(c).real();       // d rho/d x_c = 2 Re W_c
      jac(0, m + c) = -2 * j1.d1(c).imag();  // d rho/d y_c = -2 Im W_c
      jac(1, c) = 2 * j2.d1(c).real();
      jac(1, m + c) = -2 * j2.d1(c).imag();
    }
    int idx = 0;
    const cplx iu{0.0, 1.0};
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b, ++idx) {
        Jet lam = v[a] * w[b] - v[b] * w[a];
        for (int c = 0; c < m; ++c) {
          cplx dx = lam.d1(c) + lam.d1(m + c);
          cplx dy = iu * (lam.d1(c) - lam.d1(m + c));
          jac(2 + 2 * idx, c) = dx.real();
          jac(2 + 2 * idx, m + c) = dy.real();
          jac(3 + 2 * idx, c) = dx.imag();
          jac(3 + 2 * idx, m + c) = dy.imag();
        }
      }
    RVec step;
    try {
      step = least_squares(jac, f);
    } catch (const NumericalError&) {
      break;
    }
    double lambda = 1.0;
    CVec next = p;
    double next_res = res;
    for (int halve = 0; halve < 8; ++halve) {
      RVec x = to_real(p);
      for (std::size_t k = 0; k < x.size(); ++k) x[k] -= lambda * step[k];
      next = to_complex(x);
      next_res = residual(next, nullptr);
      if (next_res < res) break;
      lambda *= 0.5;
    }
    if (next_res >= res) break;
    p = std::move(next);
    res = residual(p, &f);
  }
  return p;
}

}  // namespace detail

/// Budgeted default grid density: roughly 20000 seeds total, at least 3 and
/// at most 17 points per real dimension.
inline int default_grid_per_dim(int ambient_dim) {
  double per = std::pow(20000.0, 1.0 / (2.0 * ambient_dim));
  return std::max(3, std::min(17, static_cast<int>(per)));
}

/// Grid-seeded search for the (finitely many) complex jump points in the box.
inline std::vector<JumpPoint> find_jumps(const ManifoldSpec& spec, int grid_per_dim = 0,
                                         double tol = kJumpIndicatorTol) {
  const int m = spec.ambient_dim();
  const int g = grid_per_dim > 0 ? grid_per_dim : default_grid_per_dim(m);

  std::vector<double> lo(2 * m), hi(2 * m);
  for (int j = 0; j < m; ++j) {
    lo[j] = spec.box[j].re_min;
    hi[j] = spec.box[j].re_max;
    lo[m + j] = spec.box[j].im_min;
    hi[m + j] = spec.box[j].im_max;
  }
  double min_cell = std::numeric_limits<double>::infinity();
  for (int d = 0; d < 2 * m; ++d) {
    min_cell = std::min(min_cell, g > 1 ? (hi[d] - lo[d]) / (g - 1) : hi[d] - lo[d]);
  }
  const double thin_radius = std::max(0.5 * min_cell, 4 * kJumpDedupRadius);

  // Stage 1: project every grid seed, record the relative indicator norm.
  struct Candidate {
    CVec p;
    double rel;
  };
  std::vector<Candidate> cands;
  std::vector<int> odo(2 * m, 0);
  for (;;) {
    RVec x(2 * m);
    for (int d = 0; d < 2 * m; ++d) {
      x[d] = g > 1 ? lo[d] + (hi[d] - lo[d]) * odo[d] / (g - 1) : 0.5 * (lo[d] + hi[d]);
    }
    try {
      SurfacePoint p = project_to_surface(spec, to_complex(x), 25);
      double scale = derivative_scale(spec, p.coords);
      if (scale > 0) {
        double rel = jump_indicator(spec, p).frobenius_norm() / scale;
        if (rel < 0.5) cands.push_back({p.coords, rel});
      }
    } catch (const ConvergenceError&) {
      // seed did not reach X; ignore
    }
    int d = 0;
    while (d < 2 * m && ++odo[d] == g) odo[d++] = 0;
    if (d == 2 * m) break;
  }

  // Stage 2: thin spatially, best indicator first.
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.rel != b.rel) return a.rel < b.rel;
    return detail::coords_less(a.p, b.p);
  });
  std::vector<CVec> picked;
  for (const auto& c : cands) {
    if (picked.size() >= 256) break;
    bool close = false;
    for (const auto& q : picked) {
      if (detail::ambient_distance(c.p, q) < thin_radius) {
        close = true;
        break;
      }
    }
    if (!close) picked.push_back(c.p);
  }

  // Stage 3: refine each candidate on the augmented residual and classify.
  std::vector<CVec> roots;
  for (const auto& seed : picked) {
    CVec refined = detail::refine_jump(spec, seed);
    double surf = surface_residual(spec, refined);
    double scale = derivative_scale(spec, refined);
    if (surf > spec.tol.on_surface || scale == 0) continue;
    TwoForm ind = wedge(holomorphic_partials(spec.rho1, refined),
                        holomorphic_partials(spec.rho2, refined));
    if (ind.frobenius_norm() > tol * scale) continue;
    bool inside = true;
    for (int j = 0; j < m && inside; ++j) {
      const Box& b = spec.box[j];
      double margin = 1e-6 + 0.05 * std::max(b.re_max - b.re_min, b.im_max - b.im_min);
      inside = refined[j].real() >= b.re_min - margin && refined[j].real() <= b.re_max + margin &&
               refined[j].imag() >= b.im_min - margin && refined[j].imag() <= b.im_max + margin;
    }
    if (inside) roots.push_back(refined);
  }

  // Stage 4: deterministic dedup.
  std::sort(roots.begin(), roots.end(), detail::coords_less);
  std::vector<JumpPoint> out;
  for (const auto& r : roots) {
    bool dup = false;
    for (const auto& j : out) {
      if (detail::ambient_distance(r, j.point.coords) < kJumpDedupRadius) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    JumpPoint j;
    j.point = make_surface_point(spec, r);
    j.wedge_norm = jump_indicator(spec, j.point).frobenius_norm();
    try {
      j = transversality(spec, j);
    } catch (const std::runtime_error&) {
      j.transverse = false;  // keep the located jump even if the chart fails
    }
    out.push_back(std::move(j));
  }
  return out;
}

// --- dual Gauss map in Plucker coordinates ---

/// The four u-blocks of the dual Gauss map in the chart frame at p, scaled so
/// the (n+2, nbar+2) minor equals det [[1,1],[i,-i]] = -2i.
inline PluckerPoint gauss_plucker(const ManifoldSpec& spec, const SurfacePoint& p) {
  const int m = spec.ambient_dim();
  const int np1 = spec.n + 1;
  Chart chart = graph_chart(spec, p);
  auto uf = [&](int j, int k) { return chart.frame(j, k); };
  Jet r1 = eval_jet_frame(spec.rho1, p.coords, uf, 1);
  Jet r2 = eval_jet_frame(spec.rho2, p.coords, uf, 1);

  // rows (v | vbar), (w | wbar) of the Plucker matrix in chart coordinates
  CVec v(2 * m), w(2 * m);
  for (int k = 0; k < m; ++k) {
    v[k] = r1.d1(k);
    v[m + k] = r1.d1(m + k);
    w[k] = r2.d1(k);
    w[m + k] = r2.d1(m + k);
  }
  auto minor = [&](int a, int b) { return v[a] * w[b] - v[b] * w[a]; };

  cplx g0 = minor(m - 1, 2 * m - 1);
  double scale = norm2(v) * norm2(w);
  if (std::abs(g0) <= 1e-12 * std::max(scale, 1e-300)) {
    throw NumericalError(
        "gauss_plucker: gauge minor is singular; re-rotate the chart (graph_chart failed to "
        "produce a complex fiber slot)");
  }
  cplx s = cplx{0.0, -2.0} / g0;

  PluckerPoint out;
  out.frame = chart.frame;
  out.gauge_scale = s;
  out.u_hol.resize(np1);
  out.u_mixed1.resize(np1);
  out.u_mixed2.resize(np1);
  out.u_anti.resize(np1);
  for (int k = 0; k < np1; ++k) {
    out.u_hol[k] = s * minor(k, m - 1);
    out.u_mixed1[k] = s * minor(k, 2 * m - 1);
    out.u_mixed2[k] = s * minor(m + k, m - 1);
    out.u_anti[k] = s * minor(m + k, 2 * m - 1);
  }
  return out;
}

// --- Levi form and Mizner polynomial ---

namespace detail {

/// Mixed Hessian H(j,k) = d^2 e / dz_j dzbar_k at p.
inline CMat mixed_hessian(const Expr& e, const CVec& p) {
  const int m = e.nvars();
  Jet j = eval_jet(e, p, 2);
  CMat h(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) h(a, b) = j.d2(a, m + b);
  return h;
}

/// Real 2x2 mixing R making the real gradients of (R rho)_1, (R rho)_2
/// orthonormal (Gram-Schmidt, rho1 first), plus the remixed Wirtinger rows.
struct NormalizedNormals {
  RMat remix{2, 2};
  std::array<CVec, 2> partials;  // remixed W rows
};

inline NormalizedNormals orthonormalize_normals(const CVec& w1, const CVec& w2) {
  RVec g1 = real_gradient_from_partials(w1);
  RVec g2 = real_gradient_from_partials(w2);
  double n1 = norm2(g1);
  if (n1 == 0) throw SpecError("levi form: d rho1 vanishes");
  double beta = rdot(g2, g1) / (n1 * n1);
  RVec r2 = g2;
  for (std::size_t k = 0; k < r2.size(); ++k) r2[k] -= beta * g1[k];
  double n2 = norm2(r2);
  if (n2 <= 1e-12 * n1) {
    throw SpecError("levi form: real differentials are dependent (non-regular point)");
  }
  NormalizedNormals out;
  out.remix(0, 0) = 1.0 / n1;
  out.remix(0, 1) = 0.0;
  out.remix(1, 0) = -beta / n2;
  out.remix(1, 1) = 1.0 / n2;
  const int m = static_cast<int>(w1.size());
  for (int r = 0; r < 2; ++r) {
    CVec w(m);
    for (int j = 0; j < m; ++j) w[j] = out.remix(r, 0) * w1[j] + out.remix(r, 1) * w2[j];
    out.partials[r] = std::move(w);
  }
  return out;
}

inline CMat contract_hessian(const CMat& h, const std::vector<CVec>& frame) {
  const int n = static_cast<int>(frame.size());
  const int m = h.rows();
  CMat l(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      cplx s = 0;
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) s += h(j, k) * frame[a][j] * std::conj(frame[b][k]);
      l(a, b) = s;
    }
  return l;
}

inline LeviPair levi_from_frame(const ManifoldSpec& spec, const CVec& coords,
                                const std::vector<CVec>& h_frame) {
  CVec w1 = holomorphic_partials(spec.rho1, coords);
  CVec w2 = holomorphic_partials(spec.rho2, coords);
  auto nn = orthonormalize_normals(w1, w2);
  CMat h1 = mixed_hessian(spec.rho1, coords);
  CMat h2 = mixed_hessian(spec.rho2, coords);
  const int n = static_cast<int>(h_frame.size());
  CMat c1 = contract_hessian(h1, h_frame);
  CMat c2 = contract_hessian(h2, h_frame);
  LeviPair out;
  out.base = coords;
  out.l1 = CMat(n, n);
  out.l2 = CMat(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      out.l1(a, b) = nn.remix(0, 0) * c1(a, b) + nn.remix(0, 1) * c2(a, b);
      out.l2(a, b) = nn.remix(1, 0) * c1(a, b) + nn.remix(1, 1) * c2(a, b);
    }
  out.h_frame = h_frame;
  for (int r = 0; r < 2; ++r) {
    CVec nu(nn.partials[r].size());
    for (std::size_t j = 0; j < nu.size(); ++j) nu[j] = 2.0 * std::conj(nn.partials[r][j]);
    out.normal_frame[r] = std::move(nu);
  }
  out.remix = nn.remix;
  return out;
}

}  // namespace detail

/// Levi pair at a CR (non-jump) regular point: normals orthonormalized by a
/// real 2x2 remix, H^{10} frame chosen canonically, entries
/// L_m[a,b] = sum_{j,k} d^2 rho_m / dz_j dzbar_k (v_a)_j conj((v_b)_k).
inline LeviPair levi_form(const ManifoldSpec& spec, const SurfacePoint& p) {
  if (is_jump(spec, p)) {
    throw SpecError("levi_form: called at a complex jump point; use levi_on_blowup with a "
                    "fiber direction");
  }
  ComplexTangent ct = complex_tangent(spec, p);
  if (ct.cdim != spec.n) {
    throw SpecError("levi_form: complex tangent dimension is not n");
  }
  return detail::levi_from_frame(spec, p.coords, ct.basis);
}

/// Levi pair at a point of the blow-up fiber over a transverse jump: the
/// fiber direction d in P^n selects the n-dimensional limit subspace
/// {v in H^{10}_p : sum_k d_k v_k(chart) = 0} of the (n+1)-dimensional
/// complex tangent at the jump.
inline LeviPair levi_on_blowup(const ManifoldSpec& spec, const JumpPoint& j,
                               const CVec& fiber_dir) {
  if (!j.transverse) {
    throw SpecError("levi_on_blowup: jump point is not transverse");
  }
  if (static_cast<int>(fiber_dir.size()) != spec.n + 1 || norm2(fiber_dir) == 0) {
    throw SpecError("levi_on_blowup: fiber direction must be a nonzero point of P^n");
  }
  Chart chart = graph_chart(spec, j.point);
  const int m = spec.ambient_dim();
  const int np1 = spec.n + 1;

  // delta = sum_k conj(d_k) U_k is the Hermitian dual of the fiber covector.
  CVec delta(m, cplx{});
  for (int k = 0; k < np1; ++k)
    for (int jrow = 0; jrow < m; ++jrow) delta[jrow] += std::conj(fiber_dir[k]) * chart.frame(jrow, k);
  double dn = norm2(delta);
  for (auto& z : delta) z /= dn;

  std::vector<CVec> inside;
  for (int k = 0; k < np1; ++k) {
    CVec v(m);
    for (int jrow = 0; jrow < m; ++jrow) v[jrow] = chart.frame(jrow, k);
    cplx c = hdot(v, delta);
    for (int jrow = 0; jrow < m; ++jrow) v[jrow] -= c * delta[jrow];
    inside.push_back(std::move(v));
  }
  std::vector<CVec> h_frame =
      spec.n == 0 ? std::vector<CVec>{} : canonical_subspace_frame(inside);
  if (static_cast<int>(h_frame.size()) != spec.n) {
    throw InternalError("levi_on_blowup: fiber subspace has unexpected dimension");
  }
  return detail::levi_from_frame(spec, j.point.coords, h_frame);
}

/// Coefficients of P(x,y) = det(x L1 + y L2) by interpolation at the angles
/// theta_j = j pi / (n+1).
inline MiznerPoly mizner_poly(const LeviPair& l) {
  const int n = l.l1.rows();
  MiznerPoly p;
  if (n == 0) {
    p.coef = {1.0};  // determinant of the empty pencil
    return p;
  }
  double scale = std::max({l.l1.max_abs(), l.l2.max_abs(), 1e-30});
  RMat vander(n + 1, n + 1);
  RVec values(n + 1);
  for (int j = 0; j <= n; ++j) {
    double theta = j * M_PI / (n + 1);
    double x = std::cos(theta), y = std::sin(theta);
    CMat pencil(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) pencil(r, c) = x * l.l1(r, c) + y * l.l2(r, c);
    cplx d = det(pencil);
    if (std::abs(d.imag()) > 1e-9 * std::max(1.0, std::pow(scale, n))) {
      throw InternalError("mizner_poly: Hermitian pencil determinant has an imaginary part");
    }
    values[j] = d.real();
    for (int c = 0; c <= n; ++c) vander(j, c) = std::pow(x, n - c) * std::pow(y, c);
  }
  p.coef = lu_solve(vander, values);  // distinct angles: always solvable
  return p;
}

/// Frame change L_m <- g^dagger L_m g with the H^{10} frame re-expressed.
inline LeviPair gauge_transform(const LeviPair& l, const CMat& g) {
  const int n = l.l1.rows();
  if (g.rows() != n || g.cols() != n) throw SpecError("gauge_transform: size mismatch");
  if (n > 0 && rank(g, 1e-12) < n) throw SpecError("gauge_transform: singular frame change");
  LeviPair out = l;
  CMat gd = g.adjoint();
  out.l1 = gd * l.l1 * g;
  out.l2 = gd * l.l2 * g;
  if (!l.h_frame.empty()) {
    const int m = static_cast<int>(l.h_frame.front().size());
    out.h_frame.assign(n, CVec(m, cplx{}));
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a)
        for (int jrow = 0; jrow < m; ++jrow) out.h_frame[b][jrow] += g(a, b) * l.h_frame[a][jrow];
  }
  return out;
}

/// Linear independence of (L1, L2) over R and absence of a common kernel.
inline Nondegeneracy nondegeneracy(const LeviPair& l, double tol = 1e-10) {
  const int n = l.l1.rows();
  Nondegeneracy out;
  if (n == 0) return out;  // empty matrices: dependent and kernel-free
  RMat flat(2, 2 * n * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      int k = r * n + c;
      flat(0, k) = l.l1(r, c).real();
      flat(0, n * n + k) = l.l1(r, c).imag();
      flat(1, k) = l.l2(r, c).real();
      flat(1, n * n + k) = l.l2(r, c).imag();
    }
  out.independent = flat.max_abs() > 0 && rank(flat, tol) == 2;
  CMat stacked(2 * n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      stacked(r, c) = l.l1(r, c);
      stacked(n + r, c) = l.l2(r, c);
    }
  out.common_kernel = stacked.max_abs() == 0 || rank(stacked, tol) < n;
  out.nondegenerate = out.independent && !out.common_kernel;
  return out;
}

}  // namespace crnash
