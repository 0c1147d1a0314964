#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "crnash/errors.hpp"

namespace crnash {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

inline double norm2(const CVec& v) {
  double s = 0;
  for (auto z : v) s += std::norm(z);
  return std::sqrt(s);
}

inline double norm2(const RVec& v) {
  double s = 0;
  for (auto x : v) s += x * x;
  return std::sqrt(s);
}

/// Hermitian inner product <a, b> = sum a_k conj(b_k).
inline cplx hdot(const CVec& a, const CVec& b) {
  cplx s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * std::conj(b[k]);
  return s;
}

inline double rdot(const RVec& a, const RVec& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

/// Small dense row-major matrix over double or complex<double>.
template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Mat identity(int n) {
    Mat m(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = T{1};
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  T& operator()(int r, int c) { return a_[r * cols_ + c]; }
  const T& operator()(int r, int c) const { return a_[r * cols_ + c]; }

  std::vector<T> row(int r) const {
    return std::vector<T>(a_.begin() + r * cols_, a_.begin() + (r + 1) * cols_);
  }
  std::vector<T> col(int c) const {
    std::vector<T> v(rows_);
    for (int r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
  }

  Mat transpose() const {
    Mat m(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) m(c, r) = (*this)(r, c);
    return m;
  }

  Mat adjoint() const {
    Mat m = transpose();
    if constexpr (std::is_same_v<T, cplx>) {
      for (auto& z : m.a_) z = std::conj(z);
    }
    return m;
  }

  friend Mat operator*(const Mat& x, const Mat& y) {
    if (x.cols_ != y.rows_) throw InternalError("matrix product dimension mismatch");
    Mat m(x.rows_, y.cols_);
    for (int r = 0; r < x.rows_; ++r)
      for (int k = 0; k < x.cols_; ++k) {
        T v = x(r, k);
        if (v == T{}) continue;
        for (int c = 0; c < y.cols_; ++c) m(r, c) += v * y(k, c);
      }
    return m;
  }

  std::vector<T> operator*(const std::vector<T>& v) const {
    if (static_cast<int>(v.size()) != cols_) throw InternalError("matrix-vector size mismatch");
    std::vector<T> r(rows_, T{});
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
  }

  friend Mat operator-(const Mat& x, const Mat& y) {
    Mat m(x.rows_, x.cols_);
    for (std::size_t k = 0; k < x.a_.size(); ++k) m.a_[k] = x.a_[k] - y.a_[k];
    return m;
  }
  friend Mat operator+(const Mat& x, const Mat& y) {
    Mat m(x.rows_, x.cols_);
    for (std::size_t k = 0; k < x.a_.size(); ++k) m.a_[k] = x.a_[k] + y.a_[k];
    return m;
  }

  double frobenius_norm() const {
    double s = 0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  double max_abs() const {
    double s = 0;
    for (const auto& v : a_) s = std::max(s, std::abs(v));
    return s;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> a_;
};

using CMat = Mat<cplx>;
using RMat = Mat<double>;

/// Antisymmetric 2-form coefficients lambda_{ab}, stored for a < b only.
/// Addressing through at() applies the sign, which keeps consumers free of
/// antisymmetry bookkeeping.
class TwoForm {
 public:
  TwoForm() = default;
  explicit TwoForm(int dim) : dim_(dim), coef_(dim * (dim - 1) / 2, cplx{}) {}

  int dim() const { return dim_; }
  int pair_count() const { return static_cast<int>(coef_.size()); }

  /// 0-based pair (a, b) with a < b.
  static int pack(int a, int b, int dim) { return a * (2 * dim - a - 1) / 2 + (b - a - 1); }

  cplx at(int a, int b) const {
    if (a == b) return cplx{};
    if (a < b) return coef_[pack(a, b, dim_)];
    return -coef_[pack(b, a, dim_)];
  }

  void set(int a, int b, cplx v) {
    if (a == b) {
      if (v != cplx{}) throw InternalError("TwoForm diagonal must vanish");
      return;
    }
    if (a < b) {
      coef_[pack(a, b, dim_)] = v;
    } else {
      coef_[pack(b, a, dim_)] = -v;
    }
  }

  const std::vector<cplx>& packed() const { return coef_; }
  std::vector<cplx>& packed() { return coef_; }

  double frobenius_norm() const {
    double s = 0;
    for (auto z : coef_) s += std::norm(z);
    return std::sqrt(2.0 * s);  // both (a,b) and (b,a) contribute
  }

 private:
  int dim_ = 0;
  std::vector<cplx> coef_;
};

/// lambda_{ab} = u_a v_b - u_b v_a.
inline TwoForm wedge(const CVec& u, const CVec& v) {
  if (u.size() != v.size()) throw SpecError("wedge: dimension mismatch");
  const int d = static_cast<int>(u.size());
  TwoForm w(d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) w.set(a, b, u[a] * v[b] - u[b] * v[a]);
  return w;
}

namespace detail {

/// Pivot magnitudes from full-pivoted elimination, descending.
template <class T>
std::vector<double> elimination_pivots(Mat<T> m) {
  std::vector<double> pivots;
  const int steps = std::min(m.rows(), m.cols());
  int r0 = 0, c0 = 0;
  for (int s = 0; s < steps; ++s) {
    int pr = -1, pc = -1;
    double best = 0;
    for (int r = r0; r < m.rows(); ++r)
      for (int c = c0; c < m.cols(); ++c) {
        double v = std::abs(m(r, c));
        if (v > best) {
          best = v;
          pr = r;
          pc = c;
        }
      }
    if (pr < 0 || best == 0.0) break;
    pivots.push_back(best);
    // swap pivot into (r0, c0)
    for (int c = 0; c < m.cols(); ++c) std::swap(m(r0, c), m(pr, c));
    for (int r = 0; r < m.rows(); ++r) std::swap(m(r, c0), m(r, pc));
    for (int r = r0 + 1; r < m.rows(); ++r) {
      T f = m(r, c0) / m(r0, c0);
      if (f == T{}) continue;
      for (int c = c0; c < m.cols(); ++c) m(r, c) -= f * m(r0, c);
    }
    ++r0;
    ++c0;
  }
  return pivots;
}

}  // namespace detail

/// Pivot count with magnitude above tol times the largest pivot.
template <class T>
int rank(const Mat<T>& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0) throw SpecError("rank: empty matrix");
  if (!(tol > 0)) throw SpecError("rank: tolerance must be positive");
  auto pivots = detail::elimination_pivots(m);
  if (pivots.empty()) return 0;
  int r = 0;
  for (double p : pivots)
    if (p > tol * pivots.front()) ++r;
  return r;
}

/// Ratio of extreme pivot magnitudes (a cheap conditioning proxy).
template <class T>
double pivot_condition(const Mat<T>& m) {
  auto pivots = detail::elimination_pivots(m);
  if (pivots.size() < static_cast<std::size_t>(std::min(m.rows(), m.cols()))) {
    return std::numeric_limits<double>::infinity();
  }
  return pivots.front() / pivots.back();
}

/// Determinant via partially pivoted LU.
template <class T>
T det(Mat<T> m) {
  if (m.rows() != m.cols()) throw SpecError("det: matrix must be square");
  const int n = m.rows();
  T d = T{1};
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int r = k + 1; r < n; ++r)
      if (std::abs(m(r, k)) > std::abs(m(p, k))) p = r;
    if (std::abs(m(p, k)) == 0.0) return T{};
    if (p != k) {
      for (int c = 0; c < n; ++c) std::swap(m(k, c), m(p, c));
      d = -d;
    }
    d *= m(k, k);
    for (int r = k + 1; r < n; ++r) {
      T f = m(r, k) / m(k, k);
      for (int c = k; c < n; ++c) m(r, c) -= f * m(k, c);
    }
  }
  return d;
}

/// Square solve via partially pivoted LU. Throws NumericalError when singular.
template <class T>
std::vector<T> lu_solve(Mat<T> m, std::vector<T> b) {
  if (m.rows() != m.cols() || m.rows() != static_cast<int>(b.size())) {
    throw InternalError("lu_solve: dimension mismatch");
  }
  const int n = m.rows();
  double scale = m.max_abs();
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int r = k + 1; r < n; ++r)
      if (std::abs(m(r, k)) > std::abs(m(p, k))) p = r;
    if (std::abs(m(p, k)) <= 1e-300 * std::max(1.0, scale)) {
      throw NumericalError("lu_solve: singular system");
    }
    if (p != k) {
      for (int c = 0; c < n; ++c) std::swap(m(k, c), m(p, c));
      std::swap(b[k], b[p]);
    }
    for (int r = k + 1; r < n; ++r) {
      T f = m(r, k) / m(k, k);
      if (f == T{}) continue;
      for (int c = k; c < n; ++c) m(r, c) -= f * m(k, c);
      b[r] -= f * b[k];
    }
  }
  std::vector<T> x(n);
  for (int k = n - 1; k >= 0; --k) {
    T s = b[k];
    for (int c = k + 1; c < n; ++c) s -= m(k, c) * x[c];
    x[k] = s / m(k, k);
  }
  return x;
}

/// Least squares through the normal equations, with a ridge fallback
/// lambda = 1e-12 * trace(A^T A) when the system is near-singular.
inline RVec least_squares(const RMat& a, const RVec& b) {
  if (a.rows() < a.cols()) throw SpecError("least_squares: fewer rows than columns");
  if (a.rows() != static_cast<int>(b.size())) throw SpecError("least_squares: size mismatch");
  for (int c = 0; c < a.cols(); ++c) {
    double s = 0;
    for (int r = 0; r < a.rows(); ++r) s += a(r, c) * a(r, c);
    if (s == 0.0) throw NumericalError("least_squares: zero column, system is singular");
  }
  RMat ata = a.transpose() * a;
  RVec atb = a.transpose() * b;
  try {
    return lu_solve(ata, atb);
  } catch (const NumericalError&) {
    double trace = 0;
    for (int k = 0; k < ata.rows(); ++k) trace += ata(k, k);
    RMat ridged = ata;
    for (int k = 0; k < ata.rows(); ++k) ridged(k, k) += 1e-12 * trace;
    return lu_solve(ridged, atb);
  }
}

/// Minimum-norm solution of the wide system A x = b via x = A^T (A A^T)^-1 b.
inline RVec solve_minimum_norm(const RMat& a, const RVec& b) {
  RMat aat = a * a.transpose();
  double trace = 0;
  for (int k = 0; k < aat.rows(); ++k) trace += aat(k, k);
  RVec y;
  try {
    y = lu_solve(aat, b);
  } catch (const NumericalError&) {
    RMat ridged = aat;
    for (int k = 0; k < aat.rows(); ++k) ridged(k, k) += 1e-12 * std::max(trace, 1e-30);
    y = lu_solve(ridged, b);
  }
  return a.transpose() * y;
}

/// Unitary matrix whose last column is v/|v| (Householder construction with
/// the final column phase fixed so it equals v/|v| exactly).
inline CMat unitary_complete(const CVec& v) {
  const int d = static_cast<int>(v.size());
  double nv = norm2(v);
  if (nv == 0.0 || !std::isfinite(nv)) throw SpecError("unitary_complete: zero vector");
  CVec x(v);
  for (auto& z : x) z /= nv;

  CVec u = x;
  cplx phase = std::abs(x[d - 1]) > 0 ? x[d - 1] / std::abs(x[d - 1]) : cplx{1.0, 0.0};
  u[d - 1] += phase;
  double un2 = 0;
  for (auto z : u) un2 += std::norm(z);

  CMat h = CMat::identity(d);
  if (un2 > 1e-30) {
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) h(r, c) -= 2.0 * u[r] * std::conj(u[c]) / un2;
  }
  // h * e_d = -phase * x; rescale the last column so it is exactly x.
  for (int r = 0; r < d; ++r) h(r, d - 1) = x[r];
  return h;
}

/// Modified Gram-Schmidt; vectors with residual below tol * scale are dropped.
inline std::vector<CVec> hermitian_orthonormalize(std::vector<CVec> vs, double tol = 1e-12) {
  std::vector<CVec> out;
  double scale = 0;
  for (const auto& v : vs) scale = std::max(scale, norm2(v));
  if (scale == 0) return out;
  for (auto& v : vs) {
    for (const auto& q : out) {
      cplx c = hdot(v, q);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= c * q[k];
    }
    double n = norm2(v);
    if (n > tol * scale) {
      for (auto& z : v) z /= n;
      out.push_back(std::move(v));
    }
  }
  return out;
}

inline std::vector<RVec> real_orthonormalize(std::vector<RVec> vs, double tol = 1e-12) {
  std::vector<RVec> out;
  double scale = 0;
  for (const auto& v : vs) scale = std::max(scale, norm2(v));
  if (scale == 0) return out;
  for (auto& v : vs) {
    for (const auto& q : out) {
      double c = rdot(v, q);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= c * q[k];
    }
    double n = norm2(v);
    if (n > tol * scale) {
      for (auto& z : v) z /= n;
      out.push_back(std::move(v));
    }
  }
  return out;
}

/// Orthonormal basis of the Hermitian-orthogonal complement of the given
/// (orthonormal) vectors, completed greedily from the standard basis: each
/// round picks the standard vector with the largest residual. Deterministic.
inline std::vector<CVec> hermitian_complement(const std::vector<CVec>& basis, int dim) {
  std::vector<CVec> all = basis;
  std::vector<CVec> out;
  const int want = dim - static_cast<int>(basis.size());
  for (int round = 0; round < want; ++round) {
    int best_j = -1;
    double best_norm = -1;
    CVec best;
    for (int j = 0; j < dim; ++j) {
      CVec r(dim, cplx{});
      r[j] = 1.0;
      for (const auto& q : all) {
        cplx c = hdot(r, q);
        for (int k = 0; k < dim; ++k) r[k] -= c * q[k];
      }
      double n = norm2(r);
      if (n > best_norm + 1e-15) {
        best_norm = n;
        best_j = j;
        best = std::move(r);
      }
    }
    if (best_j < 0 || best_norm < 1e-10) {
      throw InternalError("hermitian_complement: failed to complete basis");
    }
    for (auto& z : best) z /= best_norm;
    all.push_back(best);
    out.push_back(std::move(best));
  }
  return out;
}

inline std::vector<RVec> real_complement(const std::vector<RVec>& basis, int dim) {
  std::vector<RVec> all = basis;
  std::vector<RVec> out;
  const int want = dim - static_cast<int>(basis.size());
  for (int round = 0; round < want; ++round) {
    int best_j = -1;
    double best_norm = -1;
    RVec best;
    for (int j = 0; j < dim; ++j) {
      RVec r(dim, 0.0);
      r[j] = 1.0;
      for (const auto& q : all) {
        double c = rdot(r, q);
        for (int k = 0; k < dim; ++k) r[k] -= c * q[k];
      }
      double n = norm2(r);
      if (n > best_norm + 1e-15) {
        best_norm = n;
        best_j = j;
        best = std::move(r);
      }
    }
    if (best_j < 0 || best_norm < 1e-10) {
      throw InternalError("real_complement: failed to complete basis");
    }
    for (auto& z : best) z /= best_norm;
    all.push_back(best);
    out.push_back(std::move(best));
  }
  return out;
}

/// Orthonormal basis of {v : A v = 0} (unconjugated pairing). Equals the
/// Hermitian complement of the conjugated rows of A.
inline std::vector<CVec> kernel_basis(const CMat& a, double tol = 1e-10) {
  std::vector<CVec> rows;
  for (int r = 0; r < a.rows(); ++r) {
    CVec v = a.row(r);
    for (auto& z : v) z = std::conj(z);
    rows.push_back(std::move(v));
  }
  auto ortho = hermitian_orthonormalize(std::move(rows), tol);
  return hermitian_complement(ortho, a.cols());
}

/// Canonical orthonormal frame of a subspace: greedily orthonormalizes the
/// standard-basis projections, largest residual first. Depends only on the
/// subspace, so nearby subspaces get nearby frames away from ties; the
/// leading component of each frame vector comes out real positive.
inline std::vector<CVec> canonical_subspace_frame(const std::vector<CVec>& basis_in) {
  auto basis = hermitian_orthonormalize(basis_in);
  const int r = static_cast<int>(basis.size());
  if (r == 0) return {};
  const int dim = static_cast<int>(basis.front().size());
  std::vector<CVec> frame;
  for (int round = 0; round < r; ++round) {
    int best_j = -1;
    double best_norm = -1;
    CVec best;
    for (int j = 0; j < dim; ++j) {
      // project e_j into the subspace, then against the chosen frame
      CVec c(dim, cplx{});
      for (const auto& q : basis) {
        cplx w = std::conj(q[j]);  // <e_j, q>
        for (int k = 0; k < dim; ++k) c[k] += w * q[k];
      }
      for (const auto& f : frame) {
        cplx w = hdot(c, f);
        for (int k = 0; k < dim; ++k) c[k] -= w * f[k];
      }
      double n = norm2(c);
      if (n > best_norm + 1e-15) {
        best_norm = n;
        best_j = j;
        best = std::move(c);
      }
    }
    if (best_j < 0 || best_norm < 1e-12) {
      throw InternalError("canonical_subspace_frame: degenerate subspace basis");
    }
    for (auto& z : best) z /= best_norm;
    // make the pivot component real positive
    cplx piv = best[best_j];
    if (std::abs(piv) > 0) {
      cplx ph = std::conj(piv) / std::abs(piv);
      for (auto& z : best) z *= ph;
    }
    frame.push_back(std::move(best));
  }
  return frame;
}

/// sin of the Hermitian angle between the lines spanned by a and b.
inline double projective_distance(const CVec& a, const CVec& b) {
  double na = norm2(a), nb = norm2(b);
  if (na == 0 || nb == 0) throw InternalError("projective_distance: zero vector");
  double c = std::abs(hdot(a, b)) / (na * nb);
  c = std::min(1.0, c);
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

inline double hermitian_residual(const CMat& m) {
  double s = 0;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) s = std::max(s, std::abs(m(r, c) - std::conj(m(c, r))));
  return s;
}

}  // namespace crnash
