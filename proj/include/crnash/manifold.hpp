#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crnash/jet.hpp"
#include "crnash/linalg.hpp"
#include "crnash/specfile.hpp"

namespace crnash {

// X = {rho1 = 0} ∩ {rho2 = 0} in C^{n+2}, cut out by two real-valued
// polynomial expressions. Real coordinates use the blocked layout
// (Re z_1..Re z_m, Im z_1..Im z_m) throughout.

struct Box {
  double re_min = -1, re_max = 1, im_min = -1, im_max = 1;
  bool empty() const { return !(re_min <= re_max) || !(im_min <= im_max); }
};

struct Tolerances {
  double on_surface = 1e-9;
  double rank = 1e-8;
};

struct ManifoldSpec {
  int n = 0;
  std::vector<std::string> variables;  // length n+2
  Expr rho1, rho2;
  std::vector<Box> box;  // per variable
  Tolerances tol;
  std::string source_text;  // raw spec text when loaded from a file

  int ambient_dim() const { return n + 2; }
  int manifold_dim() const { return 2 * n + 2; }
};

struct SurfacePoint {
  CVec coords;
  double residual = 0;   // max(|rho1|, |rho2|)
  bool regular = false;  // real Jacobian of (rho1, rho2) has rank 2
};

struct ValidationReport {
  std::vector<std::string> failures;
  bool accepted() const { return failures.empty(); }
};

// --- real/complex coordinate helpers (blocked layout) ---

inline RVec to_real(const CVec& z) {
  const int m = static_cast<int>(z.size());
  RVec x(2 * m);
  for (int j = 0; j < m; ++j) {
    x[j] = z[j].real();
    x[m + j] = z[j].imag();
  }
  return x;
}

inline CVec to_complex(const RVec& x) {
  const int m = static_cast<int>(x.size()) / 2;
  CVec z(m);
  for (int j = 0; j < m; ++j) z[j] = {x[j], x[m + j]};
  return z;
}

/// Wirtinger z-partials (d/dz_1 .. d/dz_m) at p, as a complex row.
inline CVec holomorphic_partials(const Expr& e, const CVec& p) {
  Jet j = eval_jet(e, p, 1);
  const int m = e.nvars();
  CVec w(m);
  for (int k = 0; k < m; ++k) w[k] = j.d1(k);
  return w;
}

/// Real gradient of a real-valued e in the blocked layout: for real rho,
/// d/dx_j = 2 Re W_j and d/dy_j = -2 Im W_j with W the Wirtinger partials.
inline RVec real_gradient_from_partials(const CVec& w) {
  const int m = static_cast<int>(w.size());
  RVec g(2 * m);
  for (int j = 0; j < m; ++j) {
    g[j] = 2.0 * w[j].real();
    g[m + j] = -2.0 * w[j].imag();
  }
  return g;
}

/// 2 x 2m real Jacobian of (rho1, rho2) at p.
inline RMat real_jacobian(const ManifoldSpec& spec, const CVec& p) {
  const int m = spec.ambient_dim();
  RMat j(2, 2 * m);
  RVec g1 = real_gradient_from_partials(holomorphic_partials(spec.rho1, p));
  RVec g2 = real_gradient_from_partials(holomorphic_partials(spec.rho2, p));
  for (int c = 0; c < 2 * m; ++c) {
    j(0, c) = g1[c];
    j(1, c) = g2[c];
  }
  return j;
}

inline double surface_residual(const ManifoldSpec& spec, const CVec& p) {
  return std::max(std::abs(eval(spec.rho1, p)), std::abs(eval(spec.rho2, p)));
}

inline bool is_regular(const ManifoldSpec& spec, const CVec& p) {
  RMat j = real_jacobian(spec, p);
  return j.max_abs() > 0 && rank(j, spec.tol.rank) == 2;
}

inline SurfacePoint make_surface_point(const ManifoldSpec& spec, const CVec& coords) {
  SurfacePoint p;
  p.coords = coords;
  p.residual = surface_residual(spec, coords);
  p.regular = is_regular(spec, coords);
  return p;
}

// --- spec parsing and validation ---

inline ManifoldSpec parse_manifold_spec(const std::string& text) {
  ManifoldSpec spec;
  spec.source_text = text;
  auto entries = read_keyvalue_text(text);
  std::optional<int> n;
  std::optional<std::string> rho1_src, rho2_src;
  std::vector<std::pair<std::string, std::string>> box_entries;
  for (const auto& e : entries) {
    if (e.key == "n") {
      n = parse_int(e.value, "n");
    } else if (e.key == "variables") {
      spec.variables = split_list(e.value);
    } else if (e.key == "rho1") {
      rho1_src = e.value;
    } else if (e.key == "rho2") {
      rho2_src = e.value;
    } else if (e.key.rfind("box.", 0) == 0) {
      box_entries.emplace_back(e.key.substr(4), e.value);
    } else if (e.key == "tol.on_surface") {
      spec.tol.on_surface = parse_double(e.value, e.key);
    } else if (e.key == "tol.rank") {
      spec.tol.rank = parse_double(e.value, e.key);
    } else {
      throw SpecError("unknown key '" + e.key + "' at line " + std::to_string(e.line));
    }
  }
  if (!n) throw SpecError("missing key: n");
  if (spec.variables.empty()) throw SpecError("missing key: variables");
  if (!rho1_src) throw SpecError("missing key: rho1");
  if (!rho2_src) throw SpecError("missing key: rho2");
  spec.n = *n;
  for (const auto& v : spec.variables) {
    if (v.empty()) throw SpecError("empty variable name in variables list");
    if (v == "i" || v == "conj" || v == "re" || v == "im") {
      throw SpecError("variable name '" + v + "' is reserved");
    }
  }
  spec.rho1 = parse(*rho1_src, spec.variables);
  spec.rho2 = parse(*rho2_src, spec.variables);
  spec.box.assign(spec.variables.size(), Box{});
  for (const auto& [var, val] : box_entries) {
    auto it = std::find(spec.variables.begin(), spec.variables.end(), var);
    if (it == spec.variables.end()) throw SpecError("box for unknown variable '" + var + "'");
    auto parts = split_list(val);
    if (parts.size() != 4) {
      throw SpecError("box." + var + " needs re_min,re_max,im_min,im_max");
    }
    Box b;
    b.re_min = parse_double(parts[0], "box." + var);
    b.re_max = parse_double(parts[1], "box." + var);
    b.im_min = parse_double(parts[2], "box." + var);
    b.im_max = parse_double(parts[3], "box." + var);
    spec.box[it - spec.variables.begin()] = b;
  }
  return spec;
}

inline ManifoldSpec load_manifold_spec(const std::string& path) {
  return parse_manifold_spec(read_file(path));
}

inline ValidationReport validate(const ManifoldSpec& spec) {
  ValidationReport r;
  if (spec.n < 0) r.failures.push_back("n must be >= 0");
  if (static_cast<int>(spec.variables.size()) != spec.n + 2) {
    r.failures.push_back("variable count " + std::to_string(spec.variables.size()) +
                         " does not equal n+2 = " + std::to_string(spec.n + 2));
  }
  if (spec.ambient_dim() > kMaxAmbientVars) {
    r.failures.push_back("n+2 exceeds the supported maximum of " +
                         std::to_string(kMaxAmbientVars));
  }
  for (std::size_t k = 0; k < spec.box.size(); ++k) {
    if (spec.box[k].empty()) {
      r.failures.push_back("empty search box for variable " + spec.variables[k]);
    }
  }
  if (spec.rho1.valid() && !is_real_valued(spec.rho1)) {
    r.failures.push_back("rho1 is not real-valued");
  }
  if (spec.rho2.valid() && !is_real_valued(spec.rho2)) {
    r.failures.push_back("rho2 is not real-valued");
  }
  return r;
}

// --- projection, tangent frames, graph charts ---

inline constexpr int kDefaultProjectIters = 50;

/// Damped Gauss-Newton on (rho1, rho2) from q, taking minimum-norm steps.
inline SurfacePoint project_to_surface(const ManifoldSpec& spec, const CVec& q,
                                       int max_iter = kDefaultProjectIters) {
  CVec p = q;
  double res = surface_residual(spec, p);
  const double target = std::min(1e-12, spec.tol.on_surface);
  for (int iter = 0; iter < max_iter && res > target; ++iter) {
    RMat j = real_jacobian(spec, p);
    RVec f = {eval(spec.rho1, p).real(), eval(spec.rho2, p).real()};
    RVec step;
    try {
      step = solve_minimum_norm(j, f);
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
      next_res = surface_residual(spec, next);
      if (next_res < res) break;
      lambda *= 0.5;
    }
    if (next_res >= res) break;  // stalled
    p = std::move(next);
    res = next_res;
  }
  if (res > spec.tol.on_surface) {
    throw ConvergenceError("project_to_surface did not converge", p, res);
  }
  return make_surface_point(spec, p);
}

/// Orthonormal real basis of ker(real Jacobian), i.e. of T_p X.
inline std::vector<RVec> tangent_frame(const ManifoldSpec& spec, const SurfacePoint& p) {
  if (!p.regular) throw SpecError("tangent_frame: point is not regular");
  RMat j = real_jacobian(spec, p.coords);
  auto normals = real_orthonormalize({j.row(0), j.row(1)});
  if (normals.size() != 2) throw SpecError("tangent_frame: rank-deficient Jacobian");
  return real_complement(normals, 2 * spec.ambient_dim());
}

/// Local graph chart: a unitary frame U whose last column is the complex
/// normal direction, plus the real 2x2 re-mixing of (rho1, rho2) that pins
/// the normal form d(rho1') = dz + dzbar, d(rho2') = i(dz - dzbar) at the
/// base when the base is a complex jump point (the only place it exists).
struct Chart {
  SurfacePoint base;
  CMat frame;       // (n+2) x (n+2) unitary
  RMat remix;       // 2x2 real change of (rho1, rho2)
  bool normal_form = false;
  int n = 0;

  int param_dim() const { return 2 * n + 2; }
};

namespace detail {

inline double relative_wedge_norm(const CVec& w1, const CVec& w2) {
  double scale = norm2(w1) * norm2(w2);
  if (scale == 0) return 0;
  return wedge(w1, w2).frobenius_norm() / scale;
}

/// Last-slot chart partials alpha_m = d rho_m / d zeta_{n+2} for a frame U.
inline std::array<cplx, 2> fiber_slot_partials(const CVec& w1, const CVec& w2, const CMat& u) {
  const int m = u.rows();
  std::array<cplx, 2> alpha{cplx{}, cplx{}};
  for (int j = 0; j < m; ++j) {
    alpha[0] += w1[j] * u(j, m - 1);
    alpha[1] += w2[j] * u(j, m - 1);
  }
  return alpha;
}

/// How solvable the fiber system is in the candidate frame: |Im(conj a1 a2)|
/// normalized by |a1||a2| (zero iff d rho1, d rho2 are R-dependent there).
inline double fiber_conditioning(const std::array<cplx, 2>& alpha) {
  double s = std::abs(alpha[0]) * std::abs(alpha[1]);
  if (s == 0) return 0;
  return std::abs(std::imag(std::conj(alpha[0]) * alpha[1])) / s;
}

}  // namespace detail

inline constexpr double kJumpIndicatorTol = 1e-8;

inline Chart graph_chart(const ManifoldSpec& spec, const SurfacePoint& p) {
  const int m = spec.ambient_dim();
  CVec w1 = holomorphic_partials(spec.rho1, p.coords);
  CVec w2 = holomorphic_partials(spec.rho2, p.coords);
  if (norm2(w1) == 0 && norm2(w2) == 0) {
    throw SpecError("graph_chart: both differentials vanish (non-regular point)");
  }

  // Candidate complex normals: the Hermitian representatives of d rho_1,
  // d rho_2 and their sum. Keep the best-conditioned fiber slot.
  std::vector<CVec> candidates;
  auto conj_vec = [](CVec v) {
    for (auto& z : v) z = std::conj(z);
    return v;
  };
  if (norm2(w1) > 0) candidates.push_back(conj_vec(w1));
  if (norm2(w2) > 0) candidates.push_back(conj_vec(w2));
  {
    CVec s(m);
    for (int j = 0; j < m; ++j) s[j] = std::conj(w1[j]) + std::conj(w2[j]);
    if (norm2(s) > 0) candidates.push_back(std::move(s));
  }

  CMat best_u;
  double best_cond = -1;
  for (const auto& nu : candidates) {
    CMat u = unitary_complete(nu);
    double c = detail::fiber_conditioning(detail::fiber_slot_partials(w1, w2, u));
    if (c > best_cond) {
      best_cond = c;
      best_u = u;
    }
  }
  if (best_cond < 1e-10) {
    throw NumericalError("graph_chart: conditioning failure, no complex fiber slot solves "
                         "(rho1, rho2) locally");
  }

  Chart chart;
  chart.base = p;
  chart.frame = best_u;
  chart.n = spec.n;
  chart.remix = RMat::identity(2);

  bool jump = detail::relative_wedge_norm(w1, w2) <= kJumpIndicatorTol;
  if (jump) {
    // Solve R (alpha1, alpha2)^T = (1, i)^T over the reals.
    auto alpha = detail::fiber_slot_partials(w1, w2, best_u);
    RMat a(2, 2);
    a(0, 0) = alpha[0].real();
    a(0, 1) = alpha[1].real();
    a(1, 0) = alpha[0].imag();
    a(1, 1) = alpha[1].imag();
    RVec r1 = lu_solve(a, RVec{1.0, 0.0});
    RVec r2 = lu_solve(a, RVec{0.0, 1.0});
    chart.remix(0, 0) = r1[0];
    chart.remix(0, 1) = r1[1];
    chart.remix(1, 0) = r2[0];
    chart.remix(1, 1) = r2[1];
    chart.normal_form = true;
  }
  return chart;
}

/// Ambient point reached from chart parameters u = (Re zeta_1..Re zeta_{n+1},
/// Im zeta_1..Im zeta_{n+1}): the fiber coordinate zeta_{n+2} is solved from
/// (rho1, rho2) = 0 by a damped 2-real-unknown Newton iteration.
inline SurfacePoint chart_eval(const ManifoldSpec& spec, const Chart& chart, const RVec& u) {
  const int m = spec.ambient_dim();
  const int np1 = spec.n + 1;
  if (static_cast<int>(u.size()) != 2 * np1) {
    throw SpecError("chart_eval: parameter vector must have length 2n+2");
  }

  CVec zeta(m, cplx{});
  for (int k = 0; k < np1; ++k) zeta[k] = {u[k], u[np1 + k]};

  auto ambient = [&](cplx g) {
    CVec z = chart.base.coords;
    for (int j = 0; j < m; ++j) {
      cplx acc = 0;
      for (int k = 0; k < np1; ++k) acc += chart.frame(j, k) * zeta[k];
      acc += chart.frame(j, m - 1) * g;
      z[j] += acc;
    }
    return z;
  };

  cplx g = 0;
  CVec p = ambient(g);
  double res = surface_residual(spec, p);
  for (int iter = 0; iter < kDefaultProjectIters && res > 1e-13; ++iter) {
    CVec w1 = holomorphic_partials(spec.rho1, p);
    CVec w2 = holomorphic_partials(spec.rho2, p);
    auto alpha = detail::fiber_slot_partials(w1, w2, chart.frame);
    // For real rho: d rho/d(Re g) = 2 Re alpha, d rho/d(Im g) = -2 Im alpha.
    RMat j(2, 2);
    j(0, 0) = 2 * alpha[0].real();
    j(0, 1) = -2 * alpha[0].imag();
    j(1, 0) = 2 * alpha[1].real();
    j(1, 1) = -2 * alpha[1].imag();
    RVec f = {eval(spec.rho1, p).real(), eval(spec.rho2, p).real()};
    RVec step;
    try {
      step = lu_solve(j, f);
    } catch (const NumericalError&) {
      throw ConvergenceError("chart_eval: singular fiber system", p, res);
    }
    double lambda = 1.0;
    cplx g_next = g;
    double res_next = res;
    for (int halve = 0; halve < 8; ++halve) {
      g_next = g - lambda * cplx{step[0], step[1]};
      res_next = surface_residual(spec, ambient(g_next));
      if (res_next < res) break;
      lambda *= 0.5;
    }
    if (res_next >= res) break;
    g = g_next;
    p = ambient(g);
    res = res_next;
  }
  if (res > spec.tol.on_surface) {
    throw ConvergenceError("chart_eval: fiber Newton did not converge", p, res);
  }
  return make_surface_point(spec, p);
}

/// Max deviation of the pulled-back, re-mixed first-order data at the base
/// from the normal form (dz_{n+2} + dzbar_{n+2}, i dz_{n+2} - i dzbar_{n+2}).
inline double chart_normal_form_residual(const ManifoldSpec& spec, const Chart& chart) {
  const int m = spec.ambient_dim();
  CVec w1 = holomorphic_partials(spec.rho1, chart.base.coords);
  CVec w2 = holomorphic_partials(spec.rho2, chart.base.coords);
  // chart-frame z-partials of the re-mixed pair
  double worst = 0;
  for (int k = 0; k < m; ++k) {
    cplx d1 = 0, d2 = 0;
    for (int j = 0; j < m; ++j) {
      d1 += w1[j] * chart.frame(j, k);
      d2 += w2[j] * chart.frame(j, k);
    }
    cplx m1 = chart.remix(0, 0) * d1 + chart.remix(0, 1) * d2;
    cplx m2 = chart.remix(1, 0) * d1 + chart.remix(1, 1) * d2;
    cplx want1 = (k == m - 1) ? cplx{1, 0} : cplx{0, 0};
    cplx want2 = (k == m - 1) ? cplx{0, 1} : cplx{0, 0};
    worst = std::max({worst, std::abs(m1 - want1), std::abs(m2 - want2)});
  }
  return worst;
}

}  // namespace crnash
