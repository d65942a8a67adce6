#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "btp/core.hpp"

namespace btp {

// Coordinate-chart checks for conformal factors over a Kaehler background:
// second-order forward automatic differentiation in the 2n real variables
// underlying (z_1..z_n), repackaged into Wirtinger derivatives.

inline constexpr int kMaxRealVars = 2 * kMaxDim;
inline constexpr double kSingularGuard = 1e-6;

/// Value, gradient and symmetric Hessian of a real scalar in nv real
/// variables, propagated by forward-mode arithmetic.
class AD2 {
 public:
  AD2() = default;

  static AD2 constant(int nv, double c) {
    AD2 a;
    a.init(nv);
    a.v_ = c;
    return a;
  }

  static AD2 variable(int nv, int idx, double x) {
    AD2 a;
    a.init(nv);
    a.v_ = x;
    a.g_[static_cast<std::size_t>(idx)] = 1.0;
    return a;
  }

  int nv() const { return static_cast<int>(g_.size()); }
  double value() const { return v_; }
  double grad(int p) const { return g_[static_cast<std::size_t>(p)]; }
  double hess(int p, int q) const { return h_[static_cast<std::size_t>(p) * g_.size() + q]; }

  friend AD2 operator+(const AD2& a, const AD2& b) {
    AD2 out = a.matched(b);
    out.v_ = a.v_ + b.v_;
    for (std::size_t p = 0; p < out.g_.size(); ++p) out.g_[p] = a.g_[p] + b.g_[p];
    for (std::size_t p = 0; p < out.h_.size(); ++p) out.h_[p] = a.h_[p] + b.h_[p];
    return out;
  }

  friend AD2 operator-(const AD2& a, const AD2& b) {
    AD2 out = a.matched(b);
    out.v_ = a.v_ - b.v_;
    for (std::size_t p = 0; p < out.g_.size(); ++p) out.g_[p] = a.g_[p] - b.g_[p];
    for (std::size_t p = 0; p < out.h_.size(); ++p) out.h_[p] = a.h_[p] - b.h_[p];
    return out;
  }

  friend AD2 operator-(const AD2& a) { return AD2::constant(a.nv(), 0.0) - a; }

  friend AD2 operator*(const AD2& a, const AD2& b) {
    AD2 out = a.matched(b);
    const std::size_t nv = out.g_.size();
    out.v_ = a.v_ * b.v_;
    for (std::size_t p = 0; p < nv; ++p) out.g_[p] = a.g_[p] * b.v_ + a.v_ * b.g_[p];
    for (std::size_t p = 0; p < nv; ++p)
      for (std::size_t q = 0; q < nv; ++q)
        out.h_[p * nv + q] = a.h_[p * nv + q] * b.v_ + a.v_ * b.h_[p * nv + q] +
                             a.g_[p] * b.g_[q] + a.g_[q] * b.g_[p];
    return out;
  }

  friend AD2 operator*(const AD2& a, double c) { return a.scaled(c); }
  friend AD2 operator*(double c, const AD2& a) { return a.scaled(c); }
  friend AD2 operator+(const AD2& a, double c) {
    AD2 out = a;
    out.v_ += c;
    return out;
  }
  friend AD2 operator-(const AD2& a, double c) { return a + (-c); }

  friend AD2 operator/(const AD2& a, const AD2& b) {
    const double v = b.v_;
    return a * chain(b, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
  }

  friend AD2 log(const AD2& a) {
    const double v = a.v_;
    return chain(a, std::log(v), 1.0 / v, -1.0 / (v * v));
  }

  friend AD2 exp(const AD2& a) {
    const double e = std::exp(a.v_);
    return chain(a, e, e, e);
  }

  friend AD2 sqrt(const AD2& a) {
    const double r = std::sqrt(a.v_);
    return chain(a, r, 0.5 / r, -0.25 / (r * a.v_));
  }

 private:
  void init(int nv) {
    if (nv < 0 || nv > kMaxRealVars) fail(ErrorCode::DimensionMismatch, "jet variable count");
    g_.assign(static_cast<std::size_t>(nv), 0.0);
    h_.assign(static_cast<std::size_t>(nv) * static_cast<std::size_t>(nv), 0.0);
  }

  AD2 matched(const AD2& b) const {
    if (g_.size() != b.g_.size()) fail(ErrorCode::DimensionMismatch, "jet variable mismatch");
    AD2 out;
    out.init(nv());
    return out;
  }

  AD2 scaled(double c) const {
    AD2 out = *this;
    out.v_ *= c;
    for (double& x : out.g_) x *= c;
    for (double& x : out.h_) x *= c;
    return out;
  }

  // Composition with a scalar function given by value and first and second
  // derivative at the inner value.
  static AD2 chain(const AD2& a, double f0, double f1, double f2) {
    AD2 out = a;
    const std::size_t nv = a.g_.size();
    out.v_ = f0;
    for (std::size_t p = 0; p < nv; ++p) out.g_[p] = f1 * a.g_[p];
    for (std::size_t p = 0; p < nv; ++p)
      for (std::size_t q = 0; q < nv; ++q)
        out.h_[p * nv + q] = f1 * a.h_[p * nv + q] + f2 * a.g_[p] * a.g_[q];
    return out;
  }

  double v_ = 0;
  std::vector<double> g_;
  std::vector<double> h_;
};

/// Complex combination of two real jets; coordinates assign z_k the real
/// variables (2k, 2k+1).
struct CJet {
  AD2 re, im;

  static CJet constant(int nv, Cx c) {
    return {AD2::constant(nv, c.real()), AD2::constant(nv, c.imag())};
  }
  static CJet coordinate(int nv, int k, Cx z) {
    return {AD2::variable(nv, 2 * k, z.real()), AD2::variable(nv, 2 * k + 1, z.imag())};
  }

  CJet operator+(const CJet& o) const { return {re + o.re, im + o.im}; }
  CJet operator-(const CJet& o) const { return {re - o.re, im - o.im}; }
  CJet operator*(const CJet& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  CJet conj() const { return {re, -im}; }
  AD2 abs2() const { return re * re + im * im; }
};

using ScalarField = std::function<AD2(const std::vector<CJet>&)>;

/// Wirtinger repackaging of one evaluation: value, the 2n first
/// derivatives (d/dz_i then d/dzbar_i), the (z,z) and (z,zbar) Hessian
/// blocks, plus the raw real jet they came from.
struct Jet2 {
  int n = 0;
  Cx value{0, 0};
  std::vector<Cx> first;     // size 2n
  std::vector<Cx> zz;        // n*n, d^2/dz_i dz_j
  std::vector<Cx> zzbar;     // n*n, d^2/dz_i dzbar_j
  std::vector<double> real_grad;  // size 2n
  std::vector<double> real_hess;  // (2n)^2 row-major
  double reality_residual = 0;    // max |conj(u_i) - u_{ibar}|

  Cx d(int i) const { return first[static_cast<std::size_t>(i)]; }
  Cx dzz(int i, int j) const { return zz[static_cast<std::size_t>(i) * n + j]; }
  Cx dzzbar(int i, int j) const { return zzbar[static_cast<std::size_t>(i) * n + j]; }
};

/// Optional non-flat Kaehler background, supplied as pointwise evaluators
/// for the metric and its Christoffel symbols.
struct KahlerBackground {
  std::function<std::vector<Cx>(const std::vector<Cx>&)> metric;  // n*n, g_{i jbar}
  std::function<std::vector<Cx>(const std::vector<Cx>&)> christoffel;  // n*n*n, G^k_{ij}
};

/// Metric e^{2u} g-tilde on a chart domain with guarded singular points.
class ConformalChart {
 public:
  ConformalChart(int n, ScalarField u) : n_(n), u_(std::move(u)) {
    if (n < 1 || n > kMaxDim) fail(ErrorCode::DimensionMismatch, "chart dimension");
  }

  int n() const { return n_; }
  bool flat() const { return !background_.metric; }
  const KahlerBackground& background() const { return background_; }

  void set_background(KahlerBackground bg) { background_ = std::move(bg); }
  void exclude(std::vector<Cx> point) {
    if (static_cast<int>(point.size()) != n_)
      fail(ErrorCode::DimensionMismatch, "excluded point size");
    excluded_.push_back(std::move(point));
  }

  bool admitted(const std::vector<Cx>& z) const {
    for (const auto& c : excluded_) {
      double d2 = 0;
      for (int k = 0; k < n_; ++k) d2 += std::norm(z[static_cast<std::size_t>(k)] - c[static_cast<std::size_t>(k)]);
      if (std::sqrt(d2) < kSingularGuard) return false;
    }
    return true;
  }

  void ensure_admitted(const std::vector<Cx>& z) const {
    if (static_cast<int>(z.size()) != n_)
      fail(ErrorCode::DimensionMismatch, "point dimension");
    if (!admitted(z)) fail(ErrorCode::SingularPoint, "point inside the singular guard radius");
  }

  double value(const std::vector<Cx>& z) const {
    ensure_admitted(z);
    std::vector<CJet> pt;
    pt.reserve(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k) pt.push_back(CJet::constant(0, z[static_cast<std::size_t>(k)]));
    return u_(pt).value();
  }

  Jet2 jet(const std::vector<Cx>& z) const {
    ensure_admitted(z);
    const int nv = 2 * n_;
    std::vector<CJet> pt;
    pt.reserve(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k)
      pt.push_back(CJet::coordinate(nv, k, z[static_cast<std::size_t>(k)]));
    const AD2 u = u_(pt);

    Jet2 J;
    J.n = n_;
    J.value = Cx(u.value(), 0);
    J.real_grad.resize(static_cast<std::size_t>(nv));
    J.real_hess.resize(static_cast<std::size_t>(nv) * nv);
    for (int p = 0; p < nv; ++p) {
      J.real_grad[static_cast<std::size_t>(p)] = u.grad(p);
      for (int q = 0; q < nv; ++q) J.real_hess[static_cast<std::size_t>(p) * nv + q] = u.hess(p, q);
    }
    J.first.resize(static_cast<std::size_t>(nv));
    for (int i = 0; i < n_; ++i) {
      const Cx uz = 0.5 * Cx(u.grad(2 * i), -u.grad(2 * i + 1));
      const Cx uzb = 0.5 * Cx(u.grad(2 * i), u.grad(2 * i + 1));
      J.first[static_cast<std::size_t>(i)] = uz;
      J.first[static_cast<std::size_t>(n_ + i)] = uzb;
      J.reality_residual = std::max(J.reality_residual, std::abs(std::conj(uz) - uzb));
    }
    J.zz.resize(static_cast<std::size_t>(n_) * n_);
    J.zzbar.resize(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        const double hxx = u.hess(2 * i, 2 * j);
        const double hyy = u.hess(2 * i + 1, 2 * j + 1);
        const double hxy = u.hess(2 * i, 2 * j + 1);
        const double hyx = u.hess(2 * i + 1, 2 * j);
        J.zz[static_cast<std::size_t>(i) * n_ + j] = 0.25 * Cx(hxx - hyy, -(hxy + hyx));
        J.zzbar[static_cast<std::size_t>(i) * n_ + j] = 0.25 * Cx(hxx + hyy, hxy - hyx);
      }
    return J;
  }

  const ScalarField& field() const { return u_; }

 private:
  int n_;
  ScalarField u_;
  KahlerBackground background_;
  std::vector<std::vector<Cx>> excluded_;
};

// ---------------------------------------------------------------------- //
// chart factories

/// u = -1/2 log sum |z_k - c_k|^2, defined away from the center.
inline ConformalChart log_distance_chart(const std::vector<Cx>& center) {
  const int n = static_cast<int>(center.size());
  std::vector<Cx> c = center;
  ScalarField u = [c, n](const std::vector<CJet>& z) -> AD2 {
    const int nv = z[0].re.nv();
    AD2 rho = AD2::constant(nv, 0.0);
    for (int k = 0; k < n; ++k)
      rho = rho + (z[static_cast<std::size_t>(k)] -
                   CJet::constant(nv, c[static_cast<std::size_t>(k)]))
                      .abs2();
    return log(rho) * (-0.5);
  };
  ConformalChart chart(n, std::move(u));
  chart.exclude(center);
  return chart;
}

inline ConformalChart constant_chart(int n, double c) {
  return ConformalChart(n, [c](const std::vector<CJet>& z) {
    return AD2::constant(z[0].re.nv(), c);
  });
}

// ---------------------------------------------------------------------- //
// pointwise checks

/// Residual of the conformal-factor equations characterizing Vaisman
/// metrics e^{2u} g-tilde:
///   u_{ij}    = 2 u_i u_j + sum_k u_k G^k_{ij}
///   u_{i jbar} = 2 u_i conj(u_j) - 2 |du|^2 g_{i jbar}
/// Maximum component magnitude over both families.
inline double vaisman_pde_residual(const ConformalChart& chart, const std::vector<Cx>& z) {
  const int n = chart.n();
  const Jet2 J = chart.jet(z);

  std::vector<Cx> g(static_cast<std::size_t>(n) * n, Cx(0, 0));
  std::vector<Cx> gamma(static_cast<std::size_t>(n) * n * n, Cx(0, 0));
  if (chart.flat()) {
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i) * n + i] = Cx(1, 0);
  } else {
    g = chart.background().metric(z);
    gamma = chart.background().christoffel(z);
  }

  // |du|^2 in the background metric: sum ginv^{j i} u_i conj(u_j).
  Eigen::MatrixXcd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = g[static_cast<std::size_t>(i) * n + j];
  const Eigen::MatrixXcd Ginv = G.inverse();
  Cx grad2(0, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grad2 += Ginv(j, i) * J.d(i) * std::conj(J.d(j));

  double r = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Cx holo = J.dzz(i, j) - 2.0 * J.d(i) * J.d(j);
      for (int k = 0; k < n; ++k)
        holo -= J.d(k) * gamma[(static_cast<std::size_t>(k) * n + i) * n + j];
      const Cx mixed = J.dzzbar(i, j) - 2.0 * J.d(i) * std::conj(J.d(j)) +
                       2.0 * grad2 * g[static_cast<std::size_t>(i) * n + j];
      r = std::max(r, std::abs(holo));
      r = std::max(r, std::abs(mixed));
    }
  return r;
}

/// Coefficientwise comparison of d omega against psi wedge omega for the
/// conformal metric omega = i e^{2u} sum dz_k dzbar_k, with the Lee form
/// psi = 2 du taken from the u-jet and d omega from an independent jet of
/// the coefficient field e^{2u}.  Every conformal multiple of a Kaehler
/// metric satisfies this identity exactly, for any u; the check guards the
/// two evaluation paths against each other rather than classifying charts.
inline double lee_form_check(const ConformalChart& chart, const std::vector<Cx>& z) {
  if (!chart.flat())
    fail(ErrorCode::PreconditionFailed, "lee form comparison is wired for the flat background");
  const int n = chart.n();
  const Jet2 J = chart.jet(z);

  // Jet of m = e^{2u}.
  const ScalarField& uf = chart.field();
  ConformalChart mchart(n, [&uf](const std::vector<CJet>& p) { return exp(uf(p) * 2.0); });
  const Jet2 M = mchart.jet(z);

  const double m = M.value.real();
  double r = 0;
  // (2,1) coefficients of d omega - psi wedge omega over the basis
  // dz_a wedge dz_b wedge dzbar_c (a < b): the only contributions are
  // delta_l = m_l - 2 u_l m placed at c = b (from l = a) and c = a (with a
  // minus sign, from l = b); the (1,2) family is the conjugate picture.
  std::vector<Cx> delta(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) delta[static_cast<std::size_t>(l)] = M.d(l) - 2.0 * J.d(l) * m;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        Cx coeff(0, 0);
        if (c == b) coeff += delta[static_cast<std::size_t>(a)];
        if (c == a) coeff -= delta[static_cast<std::size_t>(b)];
        r = std::max(r, std::abs(coeff));
      }
  // Degenerate n = 1 charts still compare the line coefficients directly.
  if (n == 1) r = std::max(r, std::abs(delta[0]));
  return r;
}

/// Compares the full real jet against central finite differences with
/// step h; returns the worst relative error with denominator
/// max(1, |ad|, |fd|).
inline double ad_crosscheck(const ConformalChart& chart, const std::vector<Cx>& z, double h) {
  const int n = chart.n();
  const int nv = 2 * n;
  const Jet2 J = chart.jet(z);

  std::vector<double> x(static_cast<std::size_t>(nv));
  for (int k = 0; k < n; ++k) {
    x[static_cast<std::size_t>(2 * k)] = z[static_cast<std::size_t>(k)].real();
    x[static_cast<std::size_t>(2 * k + 1)] = z[static_cast<std::size_t>(k)].imag();
  }
  auto eval = [&](const std::vector<double>& xs) {
    std::vector<Cx> p(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      p[static_cast<std::size_t>(k)] =
          Cx(xs[static_cast<std::size_t>(2 * k)], xs[static_cast<std::size_t>(2 * k + 1)]);
    return chart.value(p);
  };

  const double f0 = eval(x);
  std::vector<double> fp(static_cast<std::size_t>(nv)), fm(static_cast<std::size_t>(nv));
  for (int p = 0; p < nv; ++p) {
    std::vector<double> xp = x, xm = x;
    xp[static_cast<std::size_t>(p)] += h;
    xm[static_cast<std::size_t>(p)] -= h;
    fp[static_cast<std::size_t>(p)] = eval(xp);
    fm[static_cast<std::size_t>(p)] = eval(xm);
  }

  auto rel = [](double ad, double fd) {
    return std::abs(ad - fd) / std::max({1.0, std::abs(ad), std::abs(fd)});
  };

  double worst = 0;
  for (int p = 0; p < nv; ++p) {
    const double fd1 = (fp[static_cast<std::size_t>(p)] - fm[static_cast<std::size_t>(p)]) / (2 * h);
    worst = std::max(worst, rel(J.real_grad[static_cast<std::size_t>(p)], fd1));
    const double fd2 =
        (fp[static_cast<std::size_t>(p)] - 2 * f0 + fm[static_cast<std::size_t>(p)]) / (h * h);
    worst = std::max(worst, rel(J.real_hess[static_cast<std::size_t>(p) * nv + p], fd2));
  }
  for (int p = 0; p < nv; ++p)
    for (int q = p + 1; q < nv; ++q) {
      std::vector<double> xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[static_cast<std::size_t>(p)] += h;
      xpp[static_cast<std::size_t>(q)] += h;
      xpm[static_cast<std::size_t>(p)] += h;
      xpm[static_cast<std::size_t>(q)] -= h;
      xmp[static_cast<std::size_t>(p)] -= h;
      xmp[static_cast<std::size_t>(q)] += h;
      xmm[static_cast<std::size_t>(p)] -= h;
      xmm[static_cast<std::size_t>(q)] -= h;
      const double fd2 = (eval(xpp) - eval(xpm) - eval(xmp) + eval(xmm)) / (4 * h * h);
      worst = std::max(worst, rel(J.real_hess[static_cast<std::size_t>(p) * nv + q], fd2));
    }
  return worst;
}

}  // namespace btp
