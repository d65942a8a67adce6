#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numeric>
#include <utility>
#include <vector>

#include "btp/core.hpp"

namespace btp {

/// Transformation behaviour of one tensor axis under a unitary change of
/// frame e'_i = sum_j conj(U_ij) e_j (coframe phi' = U phi):
///   Upper     -> U          (vector components T^k)
///   Lower     -> conj(U)    (covector / frame slots T_i)
///   LowerBar  -> U          (conjugate frame slots T_{ibar})
///   UpperBar  -> conj(U)    (conjugate vector components)
///   Direction -> not transformable (covariant-derivative axis of extent 2n)
enum class Axis { Upper, Lower, LowerBar, UpperBar, Direction };

/// Small dense complex tensor, row-major, extents <= 8 per axis (the
/// Direction axis may have extent 2n <= 16).
class Tensor {
 public:
  Tensor() = default;

  Tensor(std::vector<int> dims, std::vector<Axis> kinds)
      : dims_(std::move(dims)), kinds_(std::move(kinds)) {
    if (dims_.size() != kinds_.size())
      fail(ErrorCode::DimensionMismatch, "dims/kinds rank mismatch");
    std::size_t total = 1;
    for (std::size_t a = 0; a < dims_.size(); ++a) {
      int cap = kinds_[a] == Axis::Direction ? 2 * kMaxDim : kMaxDim;
      if (dims_[a] < 1 || dims_[a] > cap)
        fail(ErrorCode::DimensionMismatch, "axis extent out of range");
      total *= static_cast<std::size_t>(dims_[a]);
    }
    data_.assign(total, Cx(0.0, 0.0));
    strides_.resize(dims_.size());
    std::size_t s = 1;
    for (std::size_t a = dims_.size(); a-- > 0;) {
      strides_[a] = s;
      s *= static_cast<std::size_t>(dims_[a]);
    }
  }

  int rank() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  Axis kind(int axis) const { return kinds_.at(static_cast<std::size_t>(axis)); }
  const std::vector<Axis>& kinds() const { return kinds_; }
  std::vector<Cx>& data() { return data_; }
  const std::vector<Cx>& data() const { return data_; }

  std::size_t offset(std::initializer_list<int> idx) const {
    std::size_t off = 0, a = 0;
    for (int i : idx) off += static_cast<std::size_t>(i) * strides_[a++];
    return off;
  }

  template <class... I>
  Cx& operator()(I... idx) {
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <class... I>
  const Cx& operator()(I... idx) const {
    return data_[offset({static_cast<int>(idx)...})];
  }

  double max_abs() const {
    double m = 0.0;
    for (const Cx& c : data_) m = std::max(m, std::abs(c));
    return m;
  }

  /// Frobenius norm over all stored entries; invariant under unitary frame
  /// changes because every axis transforms by a unitary action.
  double frobenius() const {
    double s = 0.0;
    for (const Cx& c : data_) s += std::norm(c);
    return std::sqrt(s);
  }

  /// Records an antisymmetric axis pair after checking the stored entries
  /// honour it to 1e-12, then enforces it exactly by averaging.
  void declare_antisymmetric(int a, int b) {
    pair_check(a, b);
    double dev = 0.0;
    for_each_index([&](const std::vector<int>& idx) {
      std::vector<int> sw = idx;
      std::swap(sw[static_cast<std::size_t>(a)], sw[static_cast<std::size_t>(b)]);
      dev = std::max(dev, std::abs(at(idx) + at(sw)));
    });
    if (dev > 1e-12)
      fail(ErrorCode::PreconditionFailed, "declared antisymmetry violated");
    for_each_index([&](const std::vector<int>& idx) {
      std::vector<int> sw = idx;
      std::swap(sw[static_cast<std::size_t>(a)], sw[static_cast<std::size_t>(b)]);
      if (sw < idx) return;
      if (sw == idx) {
        at(idx) = Cx(0, 0);
        return;
      }
      Cx v = 0.5 * (at(idx) - at(sw));
      at(idx) = v;
      at(sw) = -v;
    });
    antisym_pairs_.emplace_back(a, b);
  }

  const std::vector<std::pair<int, int>>& antisymmetric_pairs() const {
    return antisym_pairs_;
  }

  Cx& at(const std::vector<int>& idx) { return data_[flat(idx)]; }
  const Cx& at(const std::vector<int>& idx) const { return data_[flat(idx)]; }

  template <class F>
  void for_each_index(F&& f) const {
    std::vector<int> idx(dims_.size(), 0);
    if (data_.empty()) return;
    for (;;) {
      f(idx);
      std::size_t a = dims_.size();
      while (a > 0) {
        --a;
        if (++idx[a] < dims_[a]) break;
        idx[a] = 0;
        if (a == 0) return;
      }
      if (dims_.empty()) return;
    }
  }

 private:
  std::size_t flat(const std::vector<int>& idx) const {
    std::size_t off = 0;
    for (std::size_t a = 0; a < idx.size(); ++a)
      off += static_cast<std::size_t>(idx[a]) * strides_[a];
    return off;
  }

  void pair_check(int a, int b) const {
    if (a == b || a < 0 || b < 0 || a >= rank() || b >= rank())
      fail(ErrorCode::DimensionMismatch, "bad axis pair");
    if (dims_[static_cast<std::size_t>(a)] != dims_[static_cast<std::size_t>(b)])
      fail(ErrorCode::DimensionMismatch, "axis pair extents differ");
  }

  std::vector<int> dims_;
  std::vector<Axis> kinds_;
  std::vector<std::size_t> strides_;
  std::vector<Cx> data_;
  std::vector<std::pair<int, int>> antisym_pairs_;
};

using DenseTensor = Tensor;

inline double tensor_diff(const Tensor& a, const Tensor& b) {
  if (a.dims() != b.dims())
    fail(ErrorCode::DimensionMismatch, "tensor_diff shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += std::norm(a.data()[i] - b.data()[i]);
  return std::sqrt(s);
}

/// Square complex matrix validated as unitary at construction.
class UnitaryMatrix {
 public:
  static UnitaryMatrix from_entries(int n, std::vector<Cx> entries, double tol = 1e-10) {
    if (n < 1 || n > kMaxDim)
      fail(ErrorCode::DimensionMismatch, "unitary dimension out of range");
    if (entries.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
      fail(ErrorCode::DimensionMismatch, "unitary entry count");
    UnitaryMatrix u;
    u.n_ = n;
    u.m_ = std::move(entries);
    double dev = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Cx s(0, 0);
        for (int k = 0; k < n; ++k) s += u(i, k) * std::conj(u(j, k));
        dev = std::max(dev, std::abs(s - (i == j ? Cx(1, 0) : Cx(0, 0))));
      }
    if (dev > tol) fail(ErrorCode::InvalidParameter, "matrix is not unitary");
    return u;
  }

  static UnitaryMatrix identity(int n) {
    std::vector<Cx> e(static_cast<std::size_t>(n) * n, Cx(0, 0));
    for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i) * n + i] = Cx(1, 0);
    return from_entries(n, std::move(e));
  }

  int n() const { return n_; }
  const Cx& operator()(int i, int j) const { return m_[static_cast<std::size_t>(i) * n_ + j]; }

  UnitaryMatrix multiply(const UnitaryMatrix& rhs) const {
    if (n_ != rhs.n_) fail(ErrorCode::DimensionMismatch, "unitary product dims");
    std::vector<Cx> e(static_cast<std::size_t>(n_) * n_, Cx(0, 0));
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k)
        for (int j = 0; j < n_; ++j)
          e[static_cast<std::size_t>(i) * n_ + j] += (*this)(i, k) * rhs(k, j);
    return from_entries(n_, std::move(e), 1e-9);
  }

  UnitaryMatrix adjoint() const {
    std::vector<Cx> e(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) e[static_cast<std::size_t>(i) * n_ + j] = std::conj((*this)(j, i));
    return from_entries(n_, std::move(e));
  }

 private:
  int n_ = 0;
  std::vector<Cx> m_;
};

/// Applies the per-axis unitary action described on Axis.  Scalar
/// contractions (|T|^2 and upper/lower pairings) are invariant.
inline Tensor change_frame(const Tensor& t, const UnitaryMatrix& u) {
  const int n = u.n();
  for (int a = 0; a < t.rank(); ++a) {
    if (t.kind(a) == Axis::Direction)
      fail(ErrorCode::DimensionMismatch, "cannot frame-transform a direction axis");
    if (t.dims()[static_cast<std::size_t>(a)] != n)
      fail(ErrorCode::DimensionMismatch, "axis extent does not match frame dimension");
  }
  Tensor out = t;
  for (int a = 0; a < t.rank(); ++a) {
    Tensor next(out.dims(), out.kinds());
    const Axis k = t.kind(a);
    next.for_each_index([&](const std::vector<int>& idx) {
      Cx acc(0, 0);
      std::vector<int> src = idx;
      const int i = idx[static_cast<std::size_t>(a)];
      for (int p = 0; p < n; ++p) {
        src[static_cast<std::size_t>(a)] = p;
        Cx c;
        switch (k) {
          case Axis::Upper: c = u(i, p); break;
          case Axis::Lower: c = std::conj(u(i, p)); break;
          case Axis::LowerBar: c = u(i, p); break;
          case Axis::UpperBar: c = std::conj(u(i, p)); break;
          default: c = Cx(0, 0); break;
        }
        acc += c * out.at(src);
      }
      next.at(idx) = acc;
    });
    out = std::move(next);
  }
  return out;
}

/// Unitary diagonalization of a normal matrix (row-major entries).
/// Eigenvalues are sorted descending by (Re, then Im); within a cluster of
/// eigenvalues closer than tol the eigenvectors are re-orthonormalized by
/// pivoted Gram-Schmidt, and every column's phase is fixed so its largest
/// entry is real positive.  Deterministic across runs.
inline std::pair<UnitaryMatrix, std::vector<Cx>> unitary_diagonalize_normal(
    const std::vector<Cx>& m, int n, double tol = kDefaultTol) {
  if (n < 1 || n > kMaxDim) fail(ErrorCode::DimensionMismatch, "dimension out of range");
  if (m.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    fail(ErrorCode::DimensionMismatch, "entry count");

  Eigen::MatrixXcd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = m[static_cast<std::size_t>(i) * n + j];

  const Eigen::MatrixXcd comm = M * M.adjoint() - M.adjoint() * M;
  if (comm.cwiseAbs().maxCoeff() > tol)
    fail(ErrorCode::NotNormal, "matrix is not normal within tolerance");

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, true);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::NoConvergence,
         "eigensolver did not converge within 30*n QR iterations");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = es.eigenvalues();
  // Re descending, Im breaking ties; ties are banded by tol so noise at
  // machine precision cannot scramble the order.
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::abs(ev(a).real() - ev(b).real()) > tol) return ev(a).real() > ev(b).real();
    if (std::abs(ev(a).imag() - ev(b).imag()) > tol) return ev(a).imag() > ev(b).imag();
    return a < b;
  });

  Eigen::MatrixXcd V(n, n);
  std::vector<Cx> d(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    V.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
    d[static_cast<std::size_t>(c)] = ev(order[static_cast<std::size_t>(c)]);
  }

  // Cluster boundaries: consecutive sorted eigenvalues within tol chain up.
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && std::abs(d[static_cast<std::size_t>(end)] - d[static_cast<std::size_t>(end - 1)]) < tol)
      ++end;
    // Pivoted modified Gram-Schmidt inside [start, end).
    std::vector<int> cols;
    for (int c = start; c < end; ++c) cols.push_back(c);
    for (std::size_t step = 0; step < cols.size(); ++step) {
      std::size_t pivot = step;
      double best = -1.0;
      for (std::size_t c = step; c < cols.size(); ++c) {
        double nv = V.col(cols[c]).norm();
        if (nv > best + 1e-15) {
          best = nv;
          pivot = c;
        }
      }
      std::swap(cols[step], cols[pivot]);
      if (best < 1e-12)
        fail(ErrorCode::NoConvergence, "degenerate eigenvector cluster");
      V.col(cols[step]).normalize();
      for (std::size_t c = step + 1; c < cols.size(); ++c) {
        Cx proj = V.col(cols[step]).dot(V.col(cols[c]));
        V.col(cols[c]) -= proj * V.col(cols[step]);
      }
    }
    start = end;
  }

  // Deterministic phases: rotate each column so its largest-magnitude entry
  // (first index among near-ties) is real positive.
  for (int c = 0; c < n; ++c) {
    int arg = 0;
    double mx = 0.0;
    for (int r = 0; r < n; ++r) mx = std::max(mx, std::abs(V(r, c)));
    for (int r = 0; r < n; ++r)
      if (std::abs(V(r, c)) >= mx * (1.0 - 1e-12)) {
        arg = r;
        break;
      }
    Cx ph = V(arg, c) / std::abs(V(arg, c));
    V.col(c) *= std::conj(ph);
  }

  const Eigen::MatrixXcd resid = V.adjoint() * M * V;
  double off = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) off = std::max(off, std::abs(resid(i, j)));
  if (off > 10.0 * tol)
    fail(ErrorCode::NoConvergence, "diagonalization residual above band");

  std::vector<Cx> entries(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) entries[static_cast<std::size_t>(i) * n + j] = V(i, j);
  return {UnitaryMatrix::from_entries(n, std::move(entries), 1e-9), std::move(d)};
}

inline std::pair<UnitaryMatrix, std::vector<Cx>> unitary_diagonalize_normal(
    const Tensor& m, double tol = kDefaultTol) {
  if (m.rank() != 2 || m.dims()[0] != m.dims()[1])
    fail(ErrorCode::DimensionMismatch, "expected a square rank-2 tensor");
  return unitary_diagonalize_normal(m.data(), m.dims()[0], tol);
}

}  // namespace btp
