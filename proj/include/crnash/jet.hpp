#pragma once

#include <array>
#include <complex>
#include <map>
#include <vector>

#include "crnash/expr.hpp"

namespace crnash {

inline constexpr int kMaxAmbientVars = 8;           // z_1..z_8 plus conjugates
inline constexpr int kMaxFormalVars = 2 * kMaxAmbientVars;
inline constexpr int kDefaultMaxJetOrder = 3;

/// Multi-index over the 2m formal variables (z_1..z_m, zbar_1..zbar_m).
using MIdx = std::array<std::uint8_t, kMaxFormalVars>;

inline int midx_degree(const MIdx& m) {
  int d = 0;
  for (auto v : m) d += v;
  return d;
}

/// Truncated multivariate Taylor expansion at a base point. The coefficient
/// stored at multi-index (alpha, beta) is the mixed Wirtinger partial
/// d^{|alpha|+|beta|} e / dz^alpha dzbar^beta divided by alpha! beta!.
class Jet {
 public:
  Jet() = default;
  Jet(int nvars, int order) : nvars_(nvars), order_(order) {}

  static Jet constant(int nvars, int order, std::complex<double> v) {
    Jet j(nvars, order);
    if (v != std::complex<double>(0.0, 0.0)) j.coef_[MIdx{}] = v;
    return j;
  }

  /// value + sum_k lin[k] * X_k (the seed of a leaf variable).
  static Jet linear(int nvars, int order, std::complex<double> value,
                    const std::vector<std::complex<double>>& lin) {
    Jet j = constant(nvars, order, value);
    if (order == 0) return j;
    for (int k = 0; k < nvars; ++k) {
      if (lin[k] != std::complex<double>(0.0, 0.0)) {
        MIdx m{};
        m[k] = 1;
        j.coef_[m] = lin[k];
      }
    }
    return j;
  }

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  const std::map<MIdx, std::complex<double>>& coefficients() const { return coef_; }

  std::complex<double> coef(const MIdx& m) const {
    auto it = coef_.find(m);
    return it == coef_.end() ? std::complex<double>(0.0, 0.0) : it->second;
  }

  std::complex<double> value() const { return coef(MIdx{}); }

  /// First Wirtinger partial with respect to formal slot k (0-based).
  std::complex<double> d1(int slot) const {
    MIdx m{};
    m[slot] = 1;
    return coef(m);
  }

  /// True mixed second partial d^2/dslot_a dslot_b (factorials restored).
  std::complex<double> d2(int slot_a, int slot_b) const {
    MIdx m{};
    m[slot_a] += 1;
    m[slot_b] += 1;
    std::complex<double> c = coef(m);
    return slot_a == slot_b ? 2.0 * c : c;
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet r = a;
    for (const auto& [m, v] : b.coef_) r.coef_[m] += v;
    r.prune();
    return r;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet r = a;
    for (const auto& [m, v] : b.coef_) r.coef_[m] -= v;
    r.prune();
    return r;
  }
  Jet operator-() const {
    Jet r = *this;
    for (auto& [m, v] : r.coef_) v = -v;
    return r;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.nvars_, a.order_);
    for (const auto& [ma, va] : a.coef_) {
      int da = midx_degree(ma);
      for (const auto& [mb, vb] : b.coef_) {
        if (da + midx_degree(mb) > a.order_) continue;
        MIdx m = ma;
        for (int k = 0; k < a.nvars_; ++k) m[k] = static_cast<std::uint8_t>(m[k] + mb[k]);
        r.coef_[m] += va * vb;
      }
    }
    r.prune();
    return r;
  }

  /// Derivative with respect to formal slot k, as an order-1-lower jet.
  Jet partial(int slot) const {
    Jet r(nvars_, order_ > 0 ? order_ - 1 : 0);
    for (const auto& [m, v] : coef_) {
      if (m[slot] == 0) continue;
      MIdx d = m;
      d[slot] -= 1;
      r.coef_[d] = v * static_cast<double>(m[slot]);
    }
    return r;
  }

 private:
  void prune() {
    for (auto it = coef_.begin(); it != coef_.end();) {
      if (it->second == std::complex<double>(0.0, 0.0)) {
        it = coef_.erase(it);
      } else {
        ++it;
      }
    }
  }

  int nvars_ = 0;
  int order_ = 0;
  std::map<MIdx, std::complex<double>> coef_;
};

namespace detail {

inline void check_jet_args(const Expr& e, std::size_t dim, int order, int max_order) {
  if (static_cast<int>(dim) != e.nvars()) {
    throw SpecError("eval_jet: point dimension does not match variable count");
  }
  if (e.nvars() > kMaxAmbientVars) {
    throw SpecError("eval_jet: more ambient variables than supported (" +
                    std::to_string(kMaxAmbientVars) + ")");
  }
  if (order < 0) throw SpecError("eval_jet: order must be >= 0");
  if (order > max_order) {
    throw SpecError("eval_jet: order " + std::to_string(order) + " exceeds maximum " +
                    std::to_string(max_order));
  }
}

}  // namespace detail

/// Jet of e at p, seeding z_k = p_k + X_k and zbar_k = conj(p_k) + X_{m+k}.
inline Jet eval_jet(const Expr& e, const std::vector<std::complex<double>>& p, int order,
                    int max_order = kDefaultMaxJetOrder) {
  detail::check_jet_args(e, p.size(), order, max_order);
  const int m = e.nvars();
  const int nf = 2 * m;
  return eval_with<Jet>(
      e.root(),
      [&](VarRef v) {
        std::vector<std::complex<double>> lin(nf, 0.0);
        int slot = (v.bar ? m : 0) + v.index - 1;
        lin[slot] = 1.0;
        std::complex<double> val = v.bar ? std::conj(p[v.index - 1]) : p[v.index - 1];
        return Jet::linear(nf, order, val, lin);
      },
      [&](const CRational& c) { return Jet::constant(nf, order, c.to_complex()); });
}

/// Jet of the pullback of e through the affine frame map z = base + U * zeta,
/// expressed in the chart variables (zeta_1..zeta_m, zetabar_1..zetabar_m):
/// z_j is seeded with base_j + sum_k U_{jk} Z_k and zbar_j with the conjugate
/// seed over the barred slots. U must be m x m (column-major access via
/// u(j,k)).
template <class FrameFn>
inline Jet eval_jet_frame(const Expr& e, const std::vector<std::complex<double>>& base,
                          FrameFn&& u, int order, int max_order = kDefaultMaxJetOrder) {
  detail::check_jet_args(e, base.size(), order, max_order);
  const int m = e.nvars();
  const int nf = 2 * m;
  return eval_with<Jet>(
      e.root(),
      [&](VarRef v) {
        std::vector<std::complex<double>> lin(nf, 0.0);
        int j = v.index - 1;
        if (!v.bar) {
          for (int k = 0; k < m; ++k) lin[k] = u(j, k);
          return Jet::linear(nf, order, base[j], lin);
        }
        for (int k = 0; k < m; ++k) lin[m + k] = std::conj(u(j, k));
        return Jet::linear(nf, order, std::conj(base[j]), lin);
      },
      [&](const CRational& c) { return Jet::constant(nf, order, c.to_complex()); });
}

}  // namespace crnash
