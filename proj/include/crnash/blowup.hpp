#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "crnash/crcore.hpp"

namespace crnash {

// Nash blow-up fibers: the classical plane-curve construction over grid
// singularities, and the CR fiber over a transverse jump point together with
// its linear model and smoothness certificate.

struct Interval {
  double min = -1, max = 1;
  bool empty() const { return !(min <= max); }
};

struct CurveSpec {
  Expr f;  // real polynomial in the two real variables (x, y)
  std::array<Interval, 2> box;
  Tolerances tol;
  std::string source_text;
};

inline CurveSpec parse_curve_spec(const std::string& text) {
  CurveSpec spec;
  spec.source_text = text;
  auto entries = read_keyvalue_text(text);
  std::optional<std::string> f_src;
  for (const auto& e : entries) {
    if (e.key == "f") {
      f_src = e.value;
    } else if (e.key == "box.x" || e.key == "box.y") {
      auto parts = split_list(e.value);
      if (parts.size() != 2) throw SpecError(e.key + " needs min,max");
      Interval iv{parse_double(parts[0], e.key), parse_double(parts[1], e.key)};
      spec.box[e.key == "box.x" ? 0 : 1] = iv;
    } else if (e.key == "tol.on_surface") {
      spec.tol.on_surface = parse_double(e.value, e.key);
    } else if (e.key == "tol.rank") {
      spec.tol.rank = parse_double(e.value, e.key);
    } else {
      throw SpecError("unknown key '" + e.key + "' at line " + std::to_string(e.line));
    }
  }
  if (!f_src) throw SpecError("missing key: f");
  spec.f = parse(*f_src, {"x", "y"});
  for (const auto& iv : spec.box) {
    if (iv.empty()) throw SpecError("empty curve search box");
  }
  return spec;
}

inline CurveSpec load_curve_spec(const std::string& path) {
  return parse_curve_spec(read_file(path));
}

// --- real-plane helpers (x, y are the first and second expression slots) ---

namespace detail {

inline double curve_value(const CurveSpec& c, double x, double y) {
  return eval(c.f, {cplx{x, 0}, cplx{y, 0}}).real();
}

struct CurveDerivs {
  double f, fx, fy, fxx, fxy, fyy;
};

inline CurveDerivs curve_derivs(const CurveSpec& c, double x, double y) {
  Jet j = eval_jet(c.f, {cplx{x, 0}, cplx{y, 0}}, 2);
  auto real_d1 = [&](int k) { return (j.d1(k) + j.d1(2 + k)).real(); };
  auto real_d2 = [&](int a, int b) {
    // (d/dz_a + d/dzbar_a)(d/dz_b + d/dzbar_b)
    return (j.d2(a, b) + j.d2(a, 2 + b) + j.d2(2 + a, b) + j.d2(2 + a, 2 + b)).real();
  };
  CurveDerivs d;
  d.f = j.value().real();
  d.fx = real_d1(0);
  d.fy = real_d1(1);
  d.fxx = real_d2(0, 0);
  d.fxy = real_d2(0, 1);
  d.fyy = real_d2(1, 1);
  return d;
}

}  // namespace detail

/// Projective point with unit norm and the leading significant coordinate
/// rotated to be real positive.
struct FiberPoint {
  CVec h;
};

inline FiberPoint make_fiber_point(CVec raw) {
  double n = norm2(raw);
  if (n == 0 || !std::isfinite(n)) throw SpecError("fiber point from a zero vector");
  for (auto& z : raw) z /= n;
  std::size_t pivot = 0;
  while (pivot < raw.size() && std::abs(raw[pivot]) <= 1e-12) ++pivot;
  if (pivot == raw.size()) throw SpecError("fiber point from a zero vector");
  cplx ph = std::conj(raw[pivot]) / std::abs(raw[pivot]);
  for (auto& z : raw) z *= ph;
  return FiberPoint{std::move(raw)};
}

// --- curve singularities and Gauss map ---

/// Newton-refined solutions of f = f_x = f_y = 0 from grid seeds.
inline std::vector<std::array<double, 2>> curve_singularities(const CurveSpec& c,
                                                              int grid_per_dim = 41) {
  std::vector<std::array<double, 2>> found;
  const auto& bx = c.box[0];
  const auto& by = c.box[1];
  for (int ix = 0; ix < grid_per_dim; ++ix) {
    for (int iy = 0; iy < grid_per_dim; ++iy) {
      double x = grid_per_dim > 1 ? bx.min + (bx.max - bx.min) * ix / (grid_per_dim - 1)
                                  : 0.5 * (bx.min + bx.max);
      double y = grid_per_dim > 1 ? by.min + (by.max - by.min) * iy / (grid_per_dim - 1)
                                  : 0.5 * (by.min + by.max);
      auto residual = [&](double px, double py) {
        auto d = detail::curve_derivs(c, px, py);
        return std::sqrt(d.f * d.f + d.fx * d.fx + d.fy * d.fy);
      };
      double res = residual(x, y);
      // degenerate roots (e.g. the cusp) converge only linearly; iterate to
      // the stall instead of a residual target
      for (int iter = 0; iter < 80 && res > 0; ++iter) {
        auto d = detail::curve_derivs(c, x, y);
        RMat jac(3, 2);
        jac(0, 0) = d.fx;
        jac(0, 1) = d.fy;
        jac(1, 0) = d.fxx;
        jac(1, 1) = d.fxy;
        jac(2, 0) = d.fxy;
        jac(2, 1) = d.fyy;
        RVec f = {d.f, d.fx, d.fy};
        RVec step;
        try {
          step = least_squares(jac, f);
        } catch (const NumericalError&) {
          break;
        }
        double lambda = 1.0;
        double nx = x, ny = y, nres = res;
        for (int halve = 0; halve < 8; ++halve) {
          nx = x - lambda * step[0];
          ny = y - lambda * step[1];
          nres = residual(nx, ny);
          if (nres < res) break;
          lambda *= 0.5;
        }
        if (nres >= res) break;
        x = nx;
        y = ny;
        res = nres;
      }
      if (res > 1e-10) continue;
      double mx = 1e-6 + 0.05 * (bx.max - bx.min);
      double my = 1e-6 + 0.05 * (by.max - by.min);
      if (x < bx.min - mx || x > bx.max + mx || y < by.min - my || y > by.max + my) continue;
      found.push_back({x, y});
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::array<double, 2>> out;
  for (const auto& p : found) {
    bool dup = false;
    for (const auto& q : out) {
      if (std::hypot(p[0] - q[0], p[1] - q[1]) < 1e-6) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(p);
  }
  return out;
}

/// Gauss map of a plane curve: the tangent line (f_y : -f_x) in P^1.
inline FiberPoint curve_gauss(const CurveSpec& c, double x, double y) {
  auto d = detail::curve_derivs(c, x, y);
  double g = std::hypot(d.fx, d.fy);
  double scale = std::max({std::abs(d.fxx), std::abs(d.fxy), std::abs(d.fyy), 1.0});
  if (g <= 1e-12 * scale) {
    throw SpecError("curve_gauss: gradient vanishes at the requested point");
  }
  return make_fiber_point({cplx{d.fy, 0}, cplx{-d.fx, 0}});
}

// --- epsilon-ladder extrapolation shared by the curve and CR fibers ---

namespace detail {

/// Align b's projective representative to a (phase only).
inline CVec phase_align(const CVec& a, const CVec& b) {
  cplx ip = hdot(b, a);
  CVec out = b;
  if (std::abs(ip) > 0) {
    cplx ph = std::conj(ip) / std::abs(ip);
    for (auto& z : out) z *= ph;
  }
  return out;
}

struct Extrapolation {
  CVec limit;
  double order = 1.0;     // estimated convergence order in epsilon
  double residual = 0.0;  // projective stability of the extrapolation
};

/// Richardson extrapolation of unit projective representatives along a
/// decreasing ladder, using the two finest levels with the convergence order
/// estimated from the three finest. Assumes first order when no estimate is
/// available.
inline Extrapolation extrapolate_ladder(const std::vector<double>& eps,
                                        const std::vector<CVec>& reps) {
  const int k = static_cast<int>(reps.size());
  if (k == 0) throw InternalError("extrapolate_ladder: empty chain");
  Extrapolation out;
  if (k == 1) {
    out.limit = reps[0];
    return out;
  }
  // phase-align the chain to the finest representative
  std::vector<CVec> x(reps);
  for (int t = k - 2; t >= 0; --t) x[t] = phase_align(x[t + 1], x[t]);

  auto diff_norm = [&](const CVec& a, const CVec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
  };

  double q = 1.0;
  double d_bc = diff_norm(x[k - 2], x[k - 1]);
  if (k >= 3) {
    double d_ab = diff_norm(x[k - 3], x[k - 2]);
    double r = eps[k - 3] / eps[k - 2];
    if (d_bc > 1e-13 && d_ab > 1e-13 && r > 1.0) {
      double est = std::log(d_ab / d_bc) / std::log(r);
      if (std::isfinite(est)) q = std::clamp(est, 0.35, 2.5);
    }
  }
  out.order = q;

  auto richardson = [&](const CVec& coarse, const CVec& fine, double rho) {
    CVec lim = fine;
    double denom = std::pow(rho, q) - 1.0;
    for (std::size_t i = 0; i < lim.size(); ++i) lim[i] += (fine[i] - coarse[i]) / denom;
    return lim;
  };

  if (d_bc < 1e-13) {
    out.limit = x[k - 1];  // already converged
    out.residual = d_bc;
    return out;
  }
  CVec lim = richardson(x[k - 2], x[k - 1], eps[k - 2] / eps[k - 1]);
  double n = norm2(lim);
  if (n == 0) {
    out.limit = x[k - 1];
    out.residual = 1.0;
    return out;
  }
  for (auto& z : lim) z /= n;
  out.limit = lim;
  if (k >= 3) {
    CVec lim2 = richardson(x[k - 3], x[k - 2], eps[k - 3] / eps[k - 2]);
    if (norm2(lim2) > 0) out.residual = projective_distance(lim, lim2);
  } else {
    out.residual = projective_distance(lim, x[k - 1]);
  }
  return out;
}

}  // namespace detail

// --- curve fiber ---

inline std::vector<double> default_curve_ladder() {
  return {5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4};
}

/// Curve points on the circle |q - s| = eps, by dense angular scanning with
/// sign-change bisection. Angles of coincident roots are merged.
inline std::vector<std::array<double, 2>> circle_points(const CurveSpec& c,
                                                        const std::array<double, 2>& s,
                                                        double eps, int samples = 720) {
  auto g = [&](double theta) {
    return detail::curve_value(c, s[0] + eps * std::cos(theta), s[1] + eps * std::sin(theta));
  };
  std::vector<double> roots;
  const double two_pi = 2.0 * M_PI;
  double prev_theta = 0.0;
  double prev = g(0.0);
  for (int k = 1; k <= samples; ++k) {
    double theta = two_pi * k / samples;
    double cur = g(theta);
    if (prev == 0.0) {
      roots.push_back(prev_theta);
    } else if ((prev < 0 && cur > 0) || (prev > 0 && cur < 0)) {
      double a = prev_theta, b = theta, fa = prev;
      for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
        double mpt = 0.5 * (a + b);
        double fm = g(mpt);
        if (fm == 0.0) {
          a = b = mpt;
          break;
        }
        if ((fa < 0) == (fm < 0)) {
          a = mpt;
          fa = fm;
        } else {
          b = mpt;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev = cur;
    prev_theta = theta;
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> merged;
  for (double theta : roots) {
    if (!merged.empty() && theta - merged.back() < 1e-9) continue;  // multiplicity collision
    merged.push_back(theta);
  }
  if (merged.size() > 1 && merged.front() + two_pi - merged.back() < 1e-9) merged.pop_back();
  std::vector<std::array<double, 2>> pts;
  for (double theta : merged) {
    pts.push_back({s[0] + eps * std::cos(theta), s[1] + eps * std::sin(theta)});
  }
  return pts;
}

struct FiberChainDiag {
  std::vector<double> eps;
  std::vector<std::array<double, 2>> points;  // circle samples feeding the chain
  std::vector<CVec> reps;                     // unit Gauss images per level
  CVec limit;
  double order = 1.0;
  double residual = 0.0;
};

struct BlowupFiber {
  std::array<double, 2> base{};
  std::vector<FiberPoint> points;
  std::vector<double> ladder;
  std::vector<FiberChainDiag> chains;
  std::vector<std::string> warnings;
};

inline constexpr double kFiberClusterRadius = 1e-3;

/// Limit directions of the Gauss map over s: circle roots per ladder level,
/// chained by projective proximity, Richardson-extrapolated to eps -> 0 and
/// clustered in the Fubini-Study metric.
inline BlowupFiber curve_fiber(const CurveSpec& c, const std::array<double, 2>& s,
                               std::vector<double> ladder = default_curve_ladder()) {
  if (ladder.size() < 2) throw SpecError("curve_fiber: ladder needs at least two levels");
  for (std::size_t k = 0; k + 1 < ladder.size(); ++k) {
    if (!(ladder[k] > ladder[k + 1])) throw SpecError("curve_fiber: ladder must decrease");
  }
  if (ladder.back() < 1e-6) throw SpecError("curve_fiber: ladder levels must be >= 1e-6");

  BlowupFiber out;
  out.base = s;

  // gather gauss images per usable level
  struct LevelSample {
    CVec rep;
    std::array<double, 2> point;
  };
  std::vector<double> eps_used;
  std::vector<std::vector<LevelSample>> levels;
  for (double eps : ladder) {
    auto pts = circle_points(c, s, eps);
    std::vector<LevelSample> reps;
    for (const auto& p : pts) {
      try {
        reps.push_back({curve_gauss(c, p[0], p[1]).h, p});
      } catch (const SpecError&) {
        // gradient vanished on the circle; skip the branch sample
      }
    }
    if (reps.empty()) {
      out.warnings.push_back("no curve points on circle eps=" + std::to_string(eps));
      continue;
    }
    eps_used.push_back(eps);
    levels.push_back(std::move(reps));
  }
  out.ladder = eps_used;
  if (levels.empty()) {
    out.warnings.push_back("empty fiber: no curve branches meet the sampling circles "
                           "(isolated real point)");
    return out;
  }

  // chain roots across levels by projective proximity
  struct Chain {
    std::vector<CVec> reps;
    std::vector<std::array<double, 2>> points;
    std::vector<double> eps;
    bool alive = true;
  };
  std::vector<Chain> chains;
  for (const auto& ls : levels[0]) chains.push_back({{ls.rep}, {ls.point}, {eps_used[0]}, true});
  for (std::size_t lvl = 1; lvl < levels.size(); ++lvl) {
    std::vector<bool> used(levels[lvl].size(), false);
    for (auto& chain : chains) {
      if (!chain.alive) continue;
      int best = -1;
      double best_d = 0.3;  // pairing threshold
      for (std::size_t k = 0; k < levels[lvl].size(); ++k) {
        if (used[k]) continue;
        double d = projective_distance(chain.reps.back(), levels[lvl][k].rep);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(k);
        }
      }
      if (best < 0) {
        chain.alive = false;
        continue;
      }
      used[best] = true;
      chain.reps.push_back(levels[lvl][best].rep);
      chain.points.push_back(levels[lvl][best].point);
      chain.eps.push_back(eps_used[lvl]);
    }
    for (std::size_t k = 0; k < levels[lvl].size(); ++k) {
      if (!used[k]) {
        chains.push_back({{levels[lvl][k].rep}, {levels[lvl][k].point}, {eps_used[lvl]}, true});
      }
    }
  }

  // extrapolate surviving chains and cluster the limits
  std::vector<CVec> limits;
  for (const auto& chain : chains) {
    if (!chain.alive || chain.reps.size() < 2) continue;
    auto ex = detail::extrapolate_ladder(chain.eps, chain.reps);
    limits.push_back(ex.limit);
    FiberChainDiag diag;
    diag.eps = chain.eps;
    diag.points = chain.points;
    diag.reps = chain.reps;
    diag.limit = ex.limit;
    diag.order = ex.order;
    diag.residual = ex.residual;
    out.chains.push_back(std::move(diag));
  }
  if (limits.empty()) {
    out.warnings.push_back("no chain survived the ladder");
    return out;
  }

  std::vector<std::vector<CVec>> clusters;
  for (const auto& lim : limits) {
    bool placed = false;
    for (auto& cl : clusters) {
      if (projective_distance(cl.front(), lim) < kFiberClusterRadius) {
        cl.push_back(lim);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({lim});
  }
  for (const auto& cl : clusters) {
    CVec mean(cl.front().size(), cplx{});
    for (const auto& v : cl) {
      CVec al = detail::phase_align(cl.front(), v);
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += al[i];
    }
    out.points.push_back(make_fiber_point(mean));
  }
  std::sort(out.points.begin(), out.points.end(), [](const FiberPoint& a, const FiberPoint& b) {
    return detail::coords_less(a.h, b.h);
  });
  return out;
}

// --- CR fiber over a transverse jump ---

inline std::vector<double> default_cr_ladder() { return {1e-2, 5e-3, 2.5e-3, 1.25e-3}; }

struct CrFiberSample {
  FiberPoint limit;
  double residual = 0;
  double order = 1.0;
  std::vector<double> ladder;
  std::vector<CVec> samples;  // unit projective representatives per level
};

namespace detail {

/// Chart-frame wedge values lambda_k at an arbitrary ambient point, in the
/// frame of a fixed chart.
inline CVec chart_wedge_values(const ManifoldSpec& spec, const Chart& chart, const CVec& at) {
  const int m = spec.ambient_dim();
  const int np1 = spec.n + 1;
  auto uf = [&](int j, int k) { return chart.frame(j, k); };
  Jet r1 = eval_jet_frame(spec.rho1, at, uf, 1);
  Jet r2 = eval_jet_frame(spec.rho2, at, uf, 1);
  CVec lam(np1);
  for (int k = 0; k < np1; ++k) {
    lam[k] = r1.d1(k) * r2.d1(m - 1) - r1.d1(m - 1) * r2.d1(k);
  }
  return lam;
}

}  // namespace detail

/// Samples the projectivized wedge map along the chart ray t * dir and
/// extrapolates t -> 0.
inline CrFiberSample cr_fiber_sample(const ManifoldSpec& spec, const JumpPoint& j,
                                     const RVec& dir,
                                     std::vector<double> ladder = default_cr_ladder()) {
  if (!j.transverse) throw SpecError("cr_fiber_sample: jump point is not transverse");
  Chart chart = graph_chart(spec, j.point);
  if (static_cast<int>(dir.size()) != chart.param_dim()) {
    throw SpecError("cr_fiber_sample: direction must have length 2n+2");
  }
  RVec d = dir;
  double dn = norm2(d);
  if (dn == 0) throw SpecError("cr_fiber_sample: zero direction");
  for (auto& v : d) v /= dn;

  CrFiberSample out;
  out.ladder = ladder;
  double scale = derivative_scale(spec, j.point.coords);
  for (double t : ladder) {
    RVec u(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) u[k] = t * d[k];
    SurfacePoint sp = chart_eval(spec, chart, u);
    CVec lam = detail::chart_wedge_values(spec, chart, sp.coords);
    if (norm2(lam) <= 1e-14 * std::max(scale, 1e-300)) {
      throw NumericalError("cr_fiber_sample: wedge map vanished along the ray "
                           "(non-transverse behavior)");
    }
    double n = norm2(lam);
    for (auto& z : lam) z /= n;
    out.samples.push_back(std::move(lam));
  }
  auto ex = detail::extrapolate_ladder(ladder, out.samples);
  out.limit = make_fiber_point(ex.limit);
  out.residual = ex.residual;
  out.order = ex.order;
  return out;
}

/// First-order model of the wedge map at the jump: the real-linear map
/// A : R^{2n+2} -> C^{n+1} whose invertibility certifies smoothness of the
/// blow-up, with the closed-form fiber parametrization dir -> [A dir].
struct CrLinearModel {
  CMat a_complex;  // (n+1) x (2n+2)
  RMat a_real;     // (2n+2) x (2n+2), Re rows stacked over Im rows
  bool smooth = false;
  double det_real = 0;
};

inline CrLinearModel cr_linear_model(const ManifoldSpec& spec, const JumpPoint& j) {
  Chart chart = graph_chart(spec, j.point);
  auto data = detail::chart_wedge_block(spec, chart);
  CrLinearModel model;
  model.a_complex = data.jac;
  model.a_real = detail::realify_rows(data.jac);
  model.det_real = det(model.a_real);
  double entry_scale = detail::wedge_jacobian_scale(spec, chart);
  model.smooth = detail::certify_full_rank(model.a_real, entry_scale, spec.tol.rank);
  return model;
}

/// A dir as a complex (n+1)-vector.
inline CVec model_image(const CrLinearModel& model, const RVec& dir) {
  const int np1 = model.a_complex.rows();
  CVec out(np1, cplx{});
  for (int k = 0; k < np1; ++k)
    for (int a = 0; a < model.a_complex.cols(); ++a) out[k] += model.a_complex(k, a) * dir[a];
  return out;
}

/// Preimage solve for each target in P^n plus a forward check.
inline bool fiber_surjectivity_check(const CrLinearModel& model, const std::vector<CVec>& targets,
                                     double tol = 1e-8) {
  if (!model.smooth) throw SpecError("fiber_surjectivity_check: model is singular");
  const int np1 = model.a_complex.rows();
  for (const auto& target : targets) {
    if (static_cast<int>(target.size()) != np1 || norm2(target) == 0) {
      throw SpecError("fiber_surjectivity_check: target must be a nonzero point of P^n");
    }
    RVec b(2 * np1);
    for (int k = 0; k < np1; ++k) {
      b[k] = target[k].real();
      b[np1 + k] = target[k].imag();
    }
    RVec dir = lu_solve(model.a_real, b);
    double dn = norm2(dir);
    if (dn == 0) return false;
    for (auto& v : dir) v /= dn;
    if (projective_distance(model_image(model, dir), target) > tol) return false;
  }
  return true;
}

}  // namespace crnash
