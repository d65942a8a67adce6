#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "btp/core.hpp"
#include "btp/forms.hpp"
#include "btp/tensor.hpp"

namespace btp {

/// Sign and normalization table used throughout this module (the engine's
/// contract; the identity suite is the regression net over it):
///   nabla e_i = sum_j theta_ij e_j,   nabla phi_k = -sum_i theta_ik phi_i
///   d phi = -(transpose theta) wedge phi + tau,  tau of pure type (2,0)
///   tau_k = 1/2 sum_ij T^k_ij phi_i phi_j   (T antisymmetric in i,j)
///   Theta = d theta - theta wedge theta
///   R_{i jbar k lbar} = Theta_{kl}(e_i, ebar_j)  (metric = identity here)
enum class ConnectionKind { chern, bismut, levi_civita_theta1, levi_civita_theta2 };

class ConnectionMatrix {
 public:
  ConnectionMatrix() = default;
  ConnectionMatrix(int n, ConnectionKind kind)
      : n_(n), kind_(kind), entries_(static_cast<std::size_t>(n) * n, InvariantForm(n, 1)) {}

  int n() const { return n_; }
  ConnectionKind kind() const { return kind_; }
  InvariantForm& at(int i, int j) { return entries_[static_cast<std::size_t>(i) * n_ + j]; }
  const InvariantForm& at(int i, int j) const {
    return entries_[static_cast<std::size_t>(i) * n_ + j];
  }

  /// Value of the 1-form entry on the direction basis vector (0..n-1 the
  /// e_i, n..2n-1 their conjugates).
  Cx eval(int i, int j, int dir) const {
    return at(i, j).coeff(Monomial{static_cast<std::uint8_t>(dir)});
  }

  /// l2 coefficient norm of theta_ij + conj(theta_ji) over all entries.
  double skew_hermitian_residual() const {
    double s = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        InvariantForm f = at(i, j) + at(j, i).conjugated();
        double l = f.l2();
        s += l * l;
      }
    return std::sqrt(s);
  }

  /// l2 norm of all entries outside the diagonal.
  double offdiagonal_l2() const {
    double s = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (i != j) {
          double l = at(i, j).l2();
          s += l * l;
        }
    return std::sqrt(s);
  }

  friend ConnectionMatrix operator+(const ConnectionMatrix& a, const ConnectionMatrix& b) {
    ConnectionMatrix out(a.n_, a.kind_);
    for (std::size_t e = 0; e < a.entries_.size(); ++e)
      out.entries_[e] = a.entries_[e] + b.entries_[e];
    return out;
  }

 private:
  int n_ = 0;
  ConnectionKind kind_ = ConnectionKind::chern;
  std::vector<InvariantForm> entries_;
};

/// Components T^k_{ij} of the Chern torsion 2-forms tau_k.
struct TorsionTensor {
  Tensor T;  // {n,n,n}, kinds Upper, Lower, Lower; antisymmetric in (1,2)
  int n() const { return T.dims().empty() ? 0 : T.dims()[0]; }
  Cx operator()(int k, int i, int j) const { return T(k, i, j); }
};

enum class CurvatureKind { chern, bismut };

struct CurvatureTensor {
  int n = 0;
  CurvatureKind kind = CurvatureKind::chern;
  /// R11(i,j,k,l) houses R_{i jbar k lbar}; kinds L, Lbar, L, Lbar.
  Tensor R11;
  /// R20(i,j,k,l) houses R_{i j k lbar}; kinds L, L, L, Lbar; antisym (i,j).
  Tensor R20;
  /// Checked extraction invariants: the (0,2) block of Theta must be the
  /// conjugate pair of R20, and R11 must satisfy the Hermitian symmetry
  /// R11(i,j,k,l) = conj(R11(j,i,l,k)).
  double conj_pair_residual = 0;
  double hermitian_residual = 0;
};

struct DerivedTensors {
  // Notation of the torsion-derived tensors:
  //   A_{k lbar} = sum_{r,s} T^r_{sk} conj(T^r_{sl})
  //   B_{k lbar} = sum_{r,s} T^l_{rs} conj(T^k_{rs})
  //   C_{ik}     = sum_{r,s} T^r_{si} T^s_{rk}
  //   phi^l_k    = sum_r conj(eta_r) T^l_{kr}, stored as phi(k,l) = phi^l_k
  //   P^{jl}_{ik}, stored P(j,l,i,k)
  //   Q(i,j,k,l) = R11b(i,j,k,l) - R11b(k,j,i,l)   (always from curvature)
  //   ricQ(i,j)  = sum_r R11b(i,j,r,r) - R11b(r,j,i,r)
  Tensor A, B;        // {n,n} kinds Lower, LowerBar (Hermitian)
  Tensor C;           // {n,n} kinds Lower, Lower (symmetric)
  Tensor phi;         // {n,n} kinds Lower, Upper; phi(i,j) = phi^j_i
  Tensor phi_star;    // phi_star(i,j) = conj(phi(j,i))
  Tensor P;           // {n,n,n,n} kinds Upper, Upper, Lower, Lower
  Tensor Q;           // {n,n,n,n} kinds Lower, LowerBar, Lower, LowerBar
  Tensor ricQ;        // {n,n} kinds Lower, LowerBar
  Tensor eta;         // {n} kind Lower; eta_k = sum_i T^i_{ik}
  std::vector<Cx> chi;  // chi^k = conj(eta_k) (components of the dual field)
  /// l2 of ricQ - (B - phi - phi_star): computed, never assumed.
  double ricq_identity_residual = 0;
};

/// Eagerly computed per-structure cache: connections, torsion, curvatures
/// and derived tensors.  Immutable after construction.
class Engine {
 public:
  explicit Engine(const StructureEquations& s) : S_(s) {
    if (!S_.is_validated()) S_.validate();
    S_.ensure_geometric();
    n_ = S_.n();
    build_chern();
    build_torsion();
    build_other_connections();
    Rc_ = curvature_of(theta_, CurvatureKind::chern);
    Rb_ = curvature_of(theta_b_, CurvatureKind::bismut);
    build_derived();
  }

  const StructureEquations& S() const { return S_; }
  int n() const { return n_; }
  const ConnectionMatrix& chern() const { return theta_; }
  const ConnectionMatrix& gamma() const { return gamma_; }
  const ConnectionMatrix& bismut() const { return theta_b_; }
  const ConnectionMatrix& theta1() const { return theta_1_; }
  const ConnectionMatrix& theta2() const { return theta_2_; }
  const TorsionTensor& torsion() const { return Tt_; }
  const CurvatureTensor& chern_curvature() const { return Rc_; }
  const CurvatureTensor& bismut_curvature() const { return Rb_; }
  const DerivedTensors& derived() const { return D_; }

  /// Largest coefficient of the parts of d phi_k + sum_j theta_jk wedge
  /// phi_j that are not of type (2,0) (those parts must be absorbed
  /// exactly, leaving tau of pure bidegree).
  double reconstruction_residual() const { return reconstruction_residual_; }

  /// l2 of del(omega^{n-1}) + eta wedge omega^{n-1}: the defining property
  /// of Gauduchon's torsion 1-form, kept as a live convention check.
  double eta_defining_residual() const {
    InvariantForm wn1 = wedge_power(omega(S_), n_ - 1);
    InvariantForm del = S_.d(wn1).bidegree_part(n_, n_ - 1);
    InvariantForm eta_form(n_, 1);
    for (int k = 0; k < n_; ++k) eta_form.add_term({k}, D_.eta(k));
    return (del + wedge(eta_form, wn1)).l2();
  }

  /// Covariant derivative of an invariant tensor: appends one axis of
  /// extent 2n (directions e_1..e_n, conj e_1..e_n).  The frame-derivative
  /// term vanishes for invariant tensors, leaving the pure
  /// connection-coefficient expression under nabla e_i = sum theta_ij e_j.
  Tensor covariant_derivative(const Tensor& t, const ConnectionMatrix& conn) const {
    for (int a = 0; a < t.rank(); ++a) {
      if (t.kind(a) == Axis::Direction)
        fail(ErrorCode::DimensionMismatch, "cannot differentiate a direction axis");
      if (t.dims()[static_cast<std::size_t>(a)] != n_)
        fail(ErrorCode::DimensionMismatch, "tensor axis extent does not match n");
    }
    std::vector<int> dims = t.dims();
    std::vector<Axis> kinds = t.kinds();
    dims.push_back(2 * n_);
    kinds.push_back(Axis::Direction);
    Tensor out(dims, kinds);
    t.for_each_index([&](const std::vector<int>& idx) {
      std::vector<int> oidx = idx;
      oidx.push_back(0);
      std::vector<int> src = idx;
      for (int d = 0; d < 2 * n_; ++d) {
        const int dbar = (d + n_) % (2 * n_);
        Cx acc(0, 0);
        for (int a = 0; a < t.rank(); ++a) {
          const int i = idx[static_cast<std::size_t>(a)];
          src = idx;
          for (int r = 0; r < n_; ++r) {
            src[static_cast<std::size_t>(a)] = r;
            const Cx& v = t.at(src);
            if (v == Cx(0, 0)) continue;
            switch (t.kind(a)) {
              case Axis::Upper: acc += conn.eval(r, i, d) * v; break;
              case Axis::Lower: acc -= conn.eval(i, r, d) * v; break;
              case Axis::LowerBar: acc -= std::conj(conn.eval(i, r, dbar)) * v; break;
              case Axis::UpperBar: acc += std::conj(conn.eval(r, i, dbar)) * v; break;
              default: break;
            }
          }
        }
        oidx.back() = d;
        out.at(oidx) = acc;
      }
    });
    return out;
  }

 private:
  void build_chern() {
    theta_ = ConnectionMatrix(n_, ConnectionKind::chern);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int m = 0; m < n_; ++m) {
          // theta_jk = sum_m ( -conj(F^j_{km}) phi_m + F^k_{jm} phibar_m ):
          // the unique skew-Hermitian matrix reproducing the (1,1) part of
          // d phi with a (2,0) remainder.
          theta_.at(j, k).add_term({m}, -std::conj(S_.F(j, k, m)));
          theta_.at(j, k).add_term({n_ + m}, S_.F(k, j, m));
        }
  }

  void build_torsion() {
    Tt_.T = Tensor({n_, n_, n_}, {Axis::Upper, Axis::Lower, Axis::Lower});
    double resid = 0;
    for (int k = 0; k < n_; ++k) {
      InvariantForm tau = S_.dphi(k);
      for (int j = 0; j < n_; ++j) tau += wedge(theta_.at(j, k), gen_form(j));
      InvariantForm pure = tau.bidegree_part(2, 0);
      resid = std::max(resid, (tau - pure).max_abs_coeff());
      for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) {
          Cx c = pure.coeff(Monomial{static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j)});
          Tt_.T(k, i, j) = c;
          Tt_.T(k, j, i) = -c;
        }
    }
    reconstruction_residual_ = resid;
  }

  void build_other_connections() {
    gamma_ = ConnectionMatrix(n_, ConnectionKind::bismut);
    theta_2_ = ConnectionMatrix(n_, ConnectionKind::levi_civita_theta2);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) {
          // gamma_ij = sum_k ( T^j_{ik} phi_k - conj(T^i_{jk}) phibar_k ).
          gamma_.at(i, j).add_term({k}, Tt_.T(j, i, k));
          gamma_.at(i, j).add_term({n_ + k}, -std::conj(Tt_.T(i, j, k)));
          // (theta_2)_ij = 1/2 sum_k conj(T^k_{ij}) phi_k.
          theta_2_.at(i, j).add_term({k}, 0.5 * std::conj(Tt_.T(k, i, j)));
        }
    theta_b_ = theta_ + gamma_;
    theta_1_ = ConnectionMatrix(n_, ConnectionKind::levi_civita_theta1);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        theta_1_.at(i, j) = theta_.at(i, j) + Cx(0.5, 0) * gamma_.at(i, j);
  }

  CurvatureTensor curvature_of(const ConnectionMatrix& th, CurvatureKind kind) const {
    CurvatureTensor R;
    R.n = n_;
    R.kind = kind;
    R.R11 = Tensor({n_, n_, n_, n_}, {Axis::Lower, Axis::LowerBar, Axis::Lower, Axis::LowerBar});
    R.R20 = Tensor({n_, n_, n_, n_}, {Axis::Lower, Axis::Lower, Axis::Lower, Axis::LowerBar});
    double cp = 0, herm2 = 0;
    for (int k = 0; k < n_; ++k)
      for (int l = 0; l < n_; ++l) {
        InvariantForm Th = S_.d(th.at(k, l));
        for (int p = 0; p < n_; ++p) Th -= wedge(th.at(k, p), th.at(p, l));
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j)
            R.R11(i, j, k, l) =
                Th.coeff(Monomial{static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(n_ + j)});
        for (int i = 0; i < n_; ++i)
          for (int j = i + 1; j < n_; ++j) {
            Cx c = Th.coeff(Monomial{static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j)});
            R.R20(i, j, k, l) = c;
            R.R20(j, i, k, l) = -c;
          }
      }
    // Second pass for the two structural checks.
    for (int k = 0; k < n_; ++k)
      for (int l = 0; l < n_; ++l) {
        InvariantForm Th = S_.d(th.at(k, l));
        for (int p = 0; p < n_; ++p) Th -= wedge(th.at(k, p), th.at(p, l));
        for (int i = 0; i < n_; ++i)
          for (int j = i + 1; j < n_; ++j) {
            Cx c02 = Th.coeff(
                Monomial{static_cast<std::uint8_t>(n_ + i), static_cast<std::uint8_t>(n_ + j)});
            cp = std::max(cp, std::abs(c02 + std::conj(R.R20(i, j, l, k))));
          }
      }
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
          for (int l = 0; l < n_; ++l)
            herm2 += std::norm(R.R11(i, j, k, l) - std::conj(R.R11(j, i, l, k)));
    R.conj_pair_residual = cp;
    R.hermitian_residual = std::sqrt(herm2);
    return R;
  }

  void build_derived() {
    const Tensor& T = Tt_.T;
    D_.eta = Tensor({n_}, {Axis::Lower});
    for (int k = 0; k < n_; ++k) {
      Cx s(0, 0);
      for (int i = 0; i < n_; ++i) s += T(i, i, k);
      D_.eta(k) = s;
      D_.chi.push_back(std::conj(s));
    }
    D_.A = Tensor({n_, n_}, {Axis::Lower, Axis::LowerBar});
    D_.B = Tensor({n_, n_}, {Axis::Lower, Axis::LowerBar});
    D_.C = Tensor({n_, n_}, {Axis::Lower, Axis::Lower});
    D_.phi = Tensor({n_, n_}, {Axis::Lower, Axis::Upper});
    D_.phi_star = Tensor({n_, n_}, {Axis::Lower, Axis::Upper});
    for (int k = 0; k < n_; ++k)
      for (int l = 0; l < n_; ++l) {
        Cx a(0, 0), b(0, 0), c(0, 0), p(0, 0);
        for (int r = 0; r < n_; ++r) {
          for (int s = 0; s < n_; ++s) {
            a += T(r, s, k) * std::conj(T(r, s, l));
            b += T(l, r, s) * std::conj(T(k, r, s));
            c += T(r, s, k) * T(s, r, l);
          }
          p += std::conj(D_.eta(r)) * T(l, k, r);
        }
        D_.A(k, l) = a;
        D_.B(k, l) = b;
        D_.C(k, l) = c;
        D_.phi(k, l) = p;  // phi^l_k
      }
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) D_.phi_star(i, j) = std::conj(D_.phi(j, i));

    D_.P = Tensor({n_, n_, n_, n_}, {Axis::Upper, Axis::Upper, Axis::Lower, Axis::Lower});
    for (int j = 0; j < n_; ++j)
      for (int l = 0; l < n_; ++l)
        for (int i = 0; i < n_; ++i)
          for (int k = 0; k < n_; ++k) {
            Cx s(0, 0);
            for (int r = 0; r < n_; ++r)
              s += T(r, i, k) * std::conj(T(r, j, l)) + T(j, i, r) * std::conj(T(k, l, r)) -
                   T(j, k, r) * std::conj(T(i, l, r)) - T(l, i, r) * std::conj(T(k, j, r)) +
                   T(l, k, r) * std::conj(T(i, j, r));
            D_.P(j, l, i, k) = s;
          }

    D_.Q = Tensor({n_, n_, n_, n_}, {Axis::Lower, Axis::LowerBar, Axis::Lower, Axis::LowerBar});
    D_.ricQ = Tensor({n_, n_}, {Axis::Lower, Axis::LowerBar});
    const Tensor& Rb = Rb_.R11;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        for (int k = 0; k < n_; ++k)
          for (int l = 0; l < n_; ++l)
            D_.Q(i, j, k, l) = Rb(i, j, k, l) - Rb(k, j, i, l);
        Cx s(0, 0);
        for (int r = 0; r < n_; ++r) s += Rb(i, j, r, r) - Rb(r, j, i, r);
        D_.ricQ(i, j) = s;
      }
    double resid = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        resid += std::norm(D_.ricQ(i, j) - D_.B(i, j) + D_.phi(i, j) + D_.phi_star(i, j));
    D_.ricq_identity_residual = std::sqrt(resid);
  }

  InvariantForm gen_form(int id) const {
    InvariantForm f(n_, 1);
    f.add_term({id}, Cx(1, 0));
    return f;
  }

  StructureEquations S_;
  int n_ = 0;
  ConnectionMatrix theta_, gamma_, theta_b_, theta_1_, theta_2_;
  TorsionTensor Tt_;
  CurvatureTensor Rc_, Rb_;
  DerivedTensors D_;
  double reconstruction_residual_ = 0;
};

inline ConnectionMatrix chern_connection(const StructureEquations& S) {
  return Engine(S).chern();
}
inline TorsionTensor chern_torsion(const StructureEquations& S) { return Engine(S).torsion(); }
inline ConnectionMatrix bismut_connection(const StructureEquations& S) {
  return Engine(S).bismut();
}
inline std::pair<ConnectionMatrix, ConnectionMatrix> levi_civita(const StructureEquations& S) {
  Engine e(S);
  return {e.theta1(), e.theta2()};
}

/// Curvature of the given connection matrix (chern or bismut kinds only;
/// the Levi-Civita blocks obey a different structure equation).
inline CurvatureTensor curvature(const StructureEquations& S, const ConnectionMatrix& conn) {
  if (conn.kind() != ConnectionKind::chern && conn.kind() != ConnectionKind::bismut)
    fail(ErrorCode::InvalidParameter, "curvature defined here for chern/bismut matrices only");
  Engine e(S);
  return conn.kind() == ConnectionKind::chern ? e.chern_curvature() : e.bismut_curvature();
}

inline Tensor covariant_derivative(const StructureEquations& S, const ConnectionMatrix& conn,
                                   const Tensor& t) {
  Engine e(S);
  return e.covariant_derivative(t, conn);
}

inline DerivedTensors derived_tensors(const StructureEquations& S) { return Engine(S).derived(); }

namespace detail {

inline double l2_accumulate(double& s, Cx v) {
  s += std::norm(v);
  return s;
}

}  // namespace detail

/// Evaluates both sides of the universal torsion/curvature identities (all
/// of them hold on every Hermitian structure); returns identity name ->
/// l2 residual over all free indices.  Comma derivatives are Bismut,
/// semicolon derivatives (B1a/B1b/B2) are Chern.
inline std::map<std::string, double> identity_suite(const Engine& e) {
  const int n = e.n();
  const Tensor& T = e.torsion().T;
  const Tensor& R20b = e.bismut_curvature().R20;
  const Tensor& R11b = e.bismut_curvature().R11;
  const Tensor& R11c = e.chern_curvature().R11;
  const Tensor& P = e.derived().P;
  const Tensor& Bt = e.derived().B;
  const Tensor& phi = e.derived().phi;

  const Tensor DT = e.covariant_derivative(T, e.bismut());
  const Tensor DcT = e.covariant_derivative(T, e.chern());
  const Tensor DR20b = e.covariant_derivative(R20b, e.bismut());
  const Tensor DR11b = e.covariant_derivative(R11b, e.bismut());
  const Tensor DcR11c = e.covariant_derivative(R11c, e.chern());
  const Tensor Deta = e.covariant_derivative(e.derived().eta, e.bismut());

  std::map<std::string, double> out;
  double s;

  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Cx rhs = DT(l, k, j, i) - DT(l, k, i, j);
          for (int r = 0; r < n; ++r)
            rhs += T(r, i, j) * T(l, r, k) + T(r, j, k) * T(l, r, i) + T(r, k, i) * T(l, r, j);
          detail::l2_accumulate(s, R20b(i, j, k, l) - rhs);
        }
  out["curv20"] = std::sqrt(s);

  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Cx rhs = DT(l, i, k, n + j) + std::conj(DT(k, j, l, n + i));
          for (int r = 0; r < n; ++r)
            rhs -= T(l, k, r) * std::conj(T(i, j, r)) + T(j, i, r) * std::conj(T(k, l, r)) +
                   T(r, i, k) * std::conj(T(r, j, l)) - T(l, i, r) * std::conj(T(k, j, r));
          detail::l2_accumulate(s, R11b(i, j, k, l) - R11c(i, j, k, l) - rhs);
        }
  out["curv11"] = std::sqrt(s);

  s = 0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          Cx lhs = DT(k, i, j, l) + DT(k, j, l, i) + DT(k, l, i, j);
          Cx rhs(0, 0);
          for (int r = 0; r < n; ++r)
            rhs += T(r, l, i) * T(k, r, j) + T(r, j, l) * T(k, r, i) + T(r, i, j) * T(k, r, l);
          detail::l2_accumulate(s, lhs - 2.0 * rhs);
        }
  out["pT"] = std::sqrt(s);

  s = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Cx lhs = DT(j, i, k, n + l) + std::conj(DT(i, j, l, n + k)) -
                   std::conj(DT(k, j, l, n + i));
          Cx rhs = -P(j, l, i, k) + R11b(i, l, k, j) - R11b(k, l, i, j);
          detail::l2_accumulate(s, lhs - rhs);
        }
  out["dbT"] = std::sqrt(s);

  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          for (int p = 0; p < n; ++p) {
            Cx lhs = DR20b(i, j, k, l, p) + DR20b(p, i, k, l, j) + DR20b(j, p, k, l, i);
            Cx rhs(0, 0);
            for (int r = 0; r < n; ++r)
              rhs -= R20b(i, r, k, l) * T(r, j, p) + R20b(j, r, k, l) * T(r, p, i) +
                     R20b(p, r, k, l) * T(r, i, j);
            detail::l2_accumulate(s, lhs - rhs);
          }
  out["dR_30"] = std::sqrt(s);

  s = 0;
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          for (int q = 0; q < n; ++q) {
            Cx lhs = DR20b(i, p, k, l, n + q) - DR11b(i, q, k, l, p) + DR11b(p, q, k, l, i);
            Cx rhs(0, 0);
            for (int r = 0; r < n; ++r)
              rhs += R11b(r, q, k, l) * T(r, i, p) - R11b(p, r, k, l) * T(q, i, r) +
                     R11b(i, r, k, l) * T(q, p, r) + R20b(p, r, k, l) * std::conj(T(i, q, r)) -
                     R20b(i, r, k, l) * std::conj(T(p, q, r));
            detail::l2_accumulate(s, lhs - rhs);
          }
  out["dR_21"] = std::sqrt(s);

  s = 0;
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          detail::l2_accumulate(s, DT(l, i, j, k) + R20b(j, k, i, l) + R20b(k, i, j, l));
  out["pT_refined"] = std::sqrt(s);

  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Cx lhs(0, 0);
          for (int r = 0; r < n; ++r)
            lhs += T(r, i, j) * T(l, r, k) + T(r, j, k) * T(l, r, i) + T(r, k, i) * T(l, r, j);
          Cx rhs = -(R20b(i, j, k, l) + R20b(j, k, i, l) + R20b(k, i, j, l));
          detail::l2_accumulate(s, lhs - rhs);
        }
  out["permutation"] = std::sqrt(s);

  s = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Cx rhs = -P(j, l, i, k) / 3.0 +
                   (R11b(i, l, k, j) - R11b(k, l, i, j)) * (2.0 / 3.0) +
                   (R11b(i, j, k, l) - R11b(k, j, i, l)) / 3.0;
          detail::l2_accumulate(s, DT(j, i, k, n + l) - rhs);
        }
  out["dbT_refined"] = std::sqrt(s);

  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Cx rhs(0, 0);
      for (int r = 0; r < n; ++r) rhs -= R20b(i, j, r, r) + R20b(j, r, i, r);
      detail::l2_accumulate(s, Deta(i, j) - rhs);
    }
  out["peta"] = std::sqrt(s);

  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Cx rhs = -(std::conj(phi(j, i)) + phi(i, j) - Bt(i, j)) / 3.0;
      for (int r = 0; r < n; ++r) {
        rhs += (R11b(r, j, i, r) - R11b(i, j, r, r)) * (2.0 / 3.0);
        rhs += (R11b(r, r, i, j) - R11b(i, r, r, j)) / 3.0;
      }
      detail::l2_accumulate(s, Deta(i, n + j) - rhs);
    }
  out["dbeta"] = std::sqrt(s);

  s = 0;
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Cx lhs = DcT(l, i, j, k) + DcT(l, j, k, i) + DcT(l, k, i, j);
          Cx rhs(0, 0);
          for (int r = 0; r < n; ++r)
            rhs += T(r, i, j) * T(l, k, r) + T(r, j, k) * T(l, i, r) + T(r, k, i) * T(l, j, r);
          detail::l2_accumulate(s, lhs - rhs);
        }
  out["B1a"] = std::sqrt(s);

  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          detail::l2_accumulate(
              s, R11c(k, j, i, l) - R11c(i, j, k, l) - DcT(l, i, k, n + j));
  out["B1b"] = std::sqrt(s);

  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m) {
            Cx lhs = DcR11c(i, j, k, l, m) - DcR11c(m, j, k, l, i);
            Cx rhs(0, 0);
            for (int r = 0; r < n; ++r) rhs += T(r, i, m) * R11c(r, j, k, l);
            detail::l2_accumulate(s, lhs - rhs);
          }
  out["B2"] = std::sqrt(s);

  return out;
}

inline std::map<std::string, double> identity_suite(const StructureEquations& S) {
  return identity_suite(Engine(S));
}

/// Two independent routes to i del dbar omega: exterior calculus on forms
/// versus the component formula
///   1/4 sum {(T^l_{ik,jbar} - T^j_{ik,lbar}) - P^{jl}_{ik}}
///       phi_i phi_k phibar_j phibar_l.
inline double plcld_formula_crosscheck(const Engine& e) {
  const int n = e.n();
  const StructureEquations& S = e.S();
  InvariantForm dbar_w = S.d(omega(S)).bidegree_part(1, 2);
  InvariantForm lhs = Cx(0, 1) * S.d(dbar_w).bidegree_part(2, 2);

  const Tensor DT = e.covariant_derivative(e.torsion().T, e.bismut());
  const Tensor& P = e.derived().P;
  InvariantForm rhs(n, 4);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          Cx c = (DT(l, i, k, n + j) - DT(j, i, k, n + l) - P(j, l, i, k)) * 0.25;
          rhs.add_term({i, k, n + j, n + l}, c);
        }
  return (lhs - rhs).l2();
}

inline double plcld_formula_crosscheck(const StructureEquations& S) {
  return plcld_formula_crosscheck(Engine(S));
}

/// Components of the Bismut torsion rebuilt from the Chern torsion: the
/// (2,0) block is -T^k_{ij}; the mixed block T^b(e_i, ebar_j) splits into
/// a barred part T^j_{ik} ebar_k and an unbarred part -conj(T^i_{jk}) e_k.
struct BismutTorsionBlocks {
  Tensor block20;       // {n,n,n} Upper, Lower, Lower
  Tensor mixed_barred;  // {n,n,n} UpperBar, Lower, LowerBar
  Tensor mixed_plain;   // {n,n,n} Upper, Lower, LowerBar
};

inline BismutTorsionBlocks bismut_torsion_blocks(const Engine& e) {
  const int n = e.n();
  const Tensor& T = e.torsion().T;
  BismutTorsionBlocks b;
  b.block20 = Tensor({n, n, n}, {Axis::Upper, Axis::Lower, Axis::Lower});
  b.mixed_barred = Tensor({n, n, n}, {Axis::UpperBar, Axis::Lower, Axis::LowerBar});
  b.mixed_plain = Tensor({n, n, n}, {Axis::Upper, Axis::Lower, Axis::LowerBar});
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        b.block20(k, i, j) = -T(k, i, j);
        b.mixed_barred(k, i, j) = T(j, i, k);
        b.mixed_plain(k, i, j) = -std::conj(T(i, j, k));
      }
  return b;
}

/// Residual pair for the line of Gauduchon connections theta + t*gamma:
/// the norms of nabla^t applied to the Chern torsion and to the Bismut
/// torsion blocks.  The check exposed is that the two vanish together.
struct GauduchonLineResiduals {
  double chern_torsion = 0;
  double bismut_torsion = 0;
};

inline GauduchonLineResiduals gauduchon_line_check(const Engine& e, double t) {
  const int n = e.n();
  ConnectionMatrix conn(n, ConnectionKind::bismut);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) conn.at(i, j) = e.chern().at(i, j) + Cx(t, 0) * e.gamma().at(i, j);
  GauduchonLineResiduals r;
  r.chern_torsion = e.covariant_derivative(e.torsion().T, conn).frobenius();
  BismutTorsionBlocks b = bismut_torsion_blocks(e);
  double s = 0;
  for (const Tensor* blk : {&b.block20, &b.mixed_barred, &b.mixed_plain}) {
    double f = e.covariant_derivative(*blk, conn).frobenius();
    s += f * f;
  }
  r.bismut_torsion = std::sqrt(s);
  return r;
}

}  // namespace btp
