#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "btp/engine.hpp"

namespace btp {

// Predicates over a fixed unitary coframe.  Every residual reported here is
// an l2 aggregate over components, which keeps all of them invariant under
// unitary changes of the working frame; flags are produced with the
// two-band rule of band_verdict.
//
// Not-applicable convention: flags that only make sense for non-balanced
// parallel-torsion structures (degenerate_torsion in classify()) are
// reported as False with residual -1 when the gate fails.  A negative
// residual therefore always means "not applicable", never a measurement.

inline FlagResult flag_from(double residual, double tol) {
  return FlagResult{band_verdict(residual, tol), residual};
}

/// Conjunction of two banded flags: False dominates, then Indeterminate.
inline FlagResult flag_and(const FlagResult& a, const FlagResult& b) {
  Verdict v;
  if (a.verdict == Verdict::False || b.verdict == Verdict::False)
    v = Verdict::False;
  else if (a.verdict == Verdict::Indeterminate || b.verdict == Verdict::Indeterminate)
    v = Verdict::Indeterminate;
  else
    v = Verdict::True;
  return FlagResult{v, std::max(a.residual, b.residual)};
}

inline InvariantForm eta_form(const Engine& e) {
  InvariantForm f(e.n(), 1);
  for (int k = 0; k < e.n(); ++k) f.add_term({k}, e.derived().eta(k));
  return f;
}

// ---------------------------------------------------------------------- //
// metric-type predicates

/// |eta| = 0 characterizes balanced metrics; the residual is |eta|.
inline FlagResult is_balanced(const Engine& e, double tol = kDefaultTol) {
  double s = 0;
  for (int k = 0; k < e.n(); ++k) s += std::norm(e.derived().eta(k));
  return flag_from(std::sqrt(s), tol);
}

inline FlagResult is_gauduchon(const Engine& e, double tol = kDefaultTol) {
  return flag_from(gauduchon_check(e.S()), tol);
}

inline FlagResult is_pluriclosed(const Engine& e, double tol = kDefaultTol) {
  return flag_from(pluriclosed_check(e.S()), tol);
}

/// Direct route: torsion parallel under the Bismut connection.
inline FlagResult is_btp_direct(const Engine& e, double tol = kDefaultTol) {
  return flag_from(e.covariant_derivative(e.torsion().T, e.bismut()).frobenius(), tol);
}

/// The four curvature conditions equivalent to parallel torsion, reported
/// one residual each: c1 the (2,0) Bismut curvature block, c2 the pair
/// symmetry R(i jbar k lbar) = R(k lbar i jbar), c3 the Bismut derivative
/// of Ric(Q), c4 the pairing of Ric(Q) against the dual torsion field.
struct Theorem11Conditions {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  Verdict verdict = Verdict::Indeterminate;
  double worst() const { return std::max(std::max(c1, c2), std::max(c3, c4)); }
  FlagResult flag() const { return FlagResult{verdict, worst()}; }
};

inline Theorem11Conditions theorem11_conditions(const Engine& e, double tol = kDefaultTol) {
  const int n = e.n();
  const Tensor& R11b = e.bismut_curvature().R11;
  Theorem11Conditions out;
  out.c1 = e.bismut_curvature().R20.frobenius();
  double s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) detail::l2_accumulate(s, R11b(i, j, k, l) - R11b(k, l, i, j));
  out.c2 = std::sqrt(s);
  out.c3 = e.covariant_derivative(e.derived().ricQ, e.bismut()).frobenius();
  s = 0;
  for (int j = 0; j < n; ++j) {
    Cx acc(0, 0);
    for (int i = 0; i < n; ++i) acc += std::conj(e.derived().eta(i)) * e.derived().ricQ(i, j);
    detail::l2_accumulate(s, acc);
  }
  out.c4 = std::sqrt(s);
  out.verdict = band_verdict(out.worst(), tol);
  return out;
}

/// Full Kaehler symmetry of the Bismut curvature: the (2,0) block and the
/// position-swap defect Q must both vanish.
inline FlagResult is_bkl(const Engine& e, double tol = kDefaultTol) {
  const double r =
      std::max(e.bismut_curvature().R20.frobenius(), e.derived().Q.frobenius());
  return flag_from(r, tol);
}

/// d(eta + conj eta) = 0: the Lee form is closed up to its constant factor.
inline FlagResult is_lcb(const Engine& e, double tol = kDefaultTol) {
  InvariantForm f = eta_form(e);
  f += eta_form(e).conjugated();
  return flag_from(e.S().d(f).l2(), tol);
}

/// Torsion shape forced by a conformally Kaehler metric:
/// tau = -1/(n-1) eta wedge phi, i.e. T^j_{ik} = (eta_k d_ij - eta_i d_kj)/(n-1);
/// combined (as a max) with the closedness residual of is_lcb.
inline double lck_shape_residual(const Engine& e) {
  const int n = e.n();
  if (n == 1) return 0.0;
  const Tensor& T = e.torsion().T;
  double s = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        Cx shape(0, 0);
        if (i == j) shape += e.derived().eta(k);
        if (k == j) shape -= e.derived().eta(i);
        detail::l2_accumulate(s, T(j, i, k) - shape / Cx(n - 1, 0));
      }
  return std::sqrt(s);
}

inline FlagResult is_lck(const Engine& e, double tol = kDefaultTol) {
  return flag_from(std::max(lck_shape_residual(e), is_lcb(e, tol).residual), tol);
}

/// Lee potential data: del eta = 0 and del omega = c eta wedge del(conj eta)
/// for a constant c fitted by least squares in coefficient space (c = 0
/// when the candidate right-hand side vanishes).
struct LpData {
  FlagResult flag{Verdict::Indeterminate, 0};
  Cx c{0, 0};
  double del_eta_residual = 0;
  double match_residual = 0;
};

inline LpData lp_analysis(const Engine& e, double tol = kDefaultTol) {
  const StructureEquations& S = e.S();
  InvariantForm etaf = eta_form(e);
  LpData out;
  out.del_eta_residual = S.d(etaf).bidegree_part(2, 0).l2();
  InvariantForm del_etabar = S.d(etaf.conjugated()).bidegree_part(1, 1);
  InvariantForm beta = wedge(etaf, del_etabar);
  InvariantForm del_omega = S.d(omega(S)).bidegree_part(2, 1);
  const double beta_norm = beta.l2();
  if (beta_norm >= tol) {
    Cx num(0, 0);
    for (const auto& [mono, coeff] : beta.terms()) num += del_omega.coeff(mono) * std::conj(coeff);
    out.c = num / Cx(beta_norm * beta_norm, 0);
  }
  out.match_residual = (del_omega - out.c * beta).l2();
  out.flag = flag_from(std::max(out.del_eta_residual, out.match_residual), tol);
  return out;
}

inline FlagResult is_lp(const Engine& e, double tol = kDefaultTol) {
  return lp_analysis(e, tol).flag;
}

/// Levi-Civita derivative of the real Lee direction eta + conj eta,
/// expressed in coframe components; zero iff the Lee form is parallel.
inline double lee_parallel_residual(const Engine& e) {
  const int n = e.n();
  const ConnectionMatrix& t1 = e.theta1();
  const ConnectionMatrix& t2 = e.theta2();
  double s = 0;
  for (int d = 0; d < 2 * n; ++d) {
    const int dbar = (d + n) % (2 * n);
    for (int j = 0; j < n; ++j) {
      Cx holo(0, 0), anti(0, 0);
      for (int k = 0; k < n; ++k) {
        const Cx ek = e.derived().eta(k);
        holo -= ek * t1.eval(j, k, d) + std::conj(ek) * std::conj(t2.eval(j, k, dbar));
        anti -= ek * t2.eval(j, k, d) + std::conj(ek) * std::conj(t1.eval(j, k, dbar));
      }
      detail::l2_accumulate(s, holo);
      detail::l2_accumulate(s, anti);
    }
  }
  return std::sqrt(s);
}

/// Vaisman: conformally Kaehler with Levi-Civita-parallel Lee form.  The
/// parallelism residual alone is not discriminating (it also vanishes on
/// non-conformally-Kaehler structures, e.g. the whole real-parameter
/// diagonal family), so the torsion-shape conjunct is required.  Balanced
/// structures are excluded by convention (zero Lee form); they report
/// False with residual -1.
inline FlagResult is_vaisman(const Engine& e, double tol = kDefaultTol) {
  FlagResult bal = is_balanced(e, tol);
  if (bal.verdict == Verdict::True) return FlagResult{Verdict::False, -1.0};
  if (bal.verdict == Verdict::Indeterminate) return FlagResult{Verdict::Indeterminate, -1.0};
  const double r = std::max(lck_shape_residual(e), lee_parallel_residual(e));
  const double lcb = is_lcb(e, tol).residual;
  return flag_from(std::max(r, lcb), tol);
}

// ---------------------------------------------------------------------- //
// admissible frames

/// Canonical frame for non-balanced parallel-torsion structures: eta is
/// rotated onto the last coframe leg (eta = lambda phi_n) and the
/// remaining block is rotated so T^j_{in} = a_i d_ij.  The eigenvalues a_i
/// come out in the deterministic order of unitary_diagonalize_normal.
struct AdmissibleFrameData {
  UnitaryMatrix U;   // phi_admissible = U phi_original
  double lambda = 0;
  std::vector<Cx> a;  // size n, a[n-1] = 0
  StructureEquations rotated;
  Tensor torsion;  // torsion tensor of the rotated structure
  std::map<std::string, double> residuals;
  double worst() const {
    double w = 0;
    for (const auto& kv : residuals) w = std::max(w, kv.second);
    return w;
  }
};

inline AdmissibleFrameData admissible_frame(const Engine& e, double tol = kDefaultTol) {
  const int n = e.n();
  const FlagResult bal = is_balanced(e, tol);
  if (bal.verdict == Verdict::True)
    fail(ErrorCode::Balanced, "admissible frames require |eta| > 0");
  if (bal.verdict == Verdict::Indeterminate)
    fail(ErrorCode::Indeterminate, "|eta| lies in the ambiguous band");
  const FlagResult btp = is_btp_direct(e, tol);
  if (btp.verdict == Verdict::False)
    fail(ErrorCode::NotBTP, "admissible frames require Bismut-parallel torsion");
  if (btp.verdict == Verdict::Indeterminate)
    fail(ErrorCode::Indeterminate, "parallel-torsion residual lies in the ambiguous band");

  const double lambda = bal.residual;

  // Stage 1: unitary with last row eta/lambda, completed by pivoted
  // Gram-Schmidt over the standard basis (largest remaining norm first).
  std::vector<std::vector<Cx>> rows(static_cast<std::size_t>(n));
  std::vector<Cx> eta_row(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) eta_row[static_cast<std::size_t>(p)] = e.derived().eta(p) / lambda;
  rows[static_cast<std::size_t>(n - 1)] = eta_row;
  std::vector<std::vector<Cx>> accepted{eta_row};
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int slot = 0; slot < n - 1; ++slot) {
    int best = -1;
    double best_norm = -1;
    std::vector<Cx> best_vec;
    for (int c = 0; c < n; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      std::vector<Cx> v(static_cast<std::size_t>(n), Cx(0, 0));
      v[static_cast<std::size_t>(c)] = Cx(1, 0);
      for (const auto& w : accepted) {
        Cx ip(0, 0);
        for (int p = 0; p < n; ++p) ip += v[static_cast<std::size_t>(p)] * std::conj(w[static_cast<std::size_t>(p)]);
        for (int p = 0; p < n; ++p) v[static_cast<std::size_t>(p)] -= ip * w[static_cast<std::size_t>(p)];
      }
      double nn = 0;
      for (const Cx& z : v) nn += std::norm(z);
      if (nn > best_norm + 1e-15) {
        best_norm = nn;
        best = c;
        best_vec = v;
      }
    }
    const double nrm = std::sqrt(best_norm);
    for (Cx& z : best_vec) z /= nrm;
    rows[static_cast<std::size_t>(slot)] = best_vec;
    accepted.push_back(best_vec);
    used[static_cast<std::size_t>(best)] = true;
  }
  std::vector<Cx> u1(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      u1[static_cast<std::size_t>(i) * n + j] = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  const UnitaryMatrix U1 = UnitaryMatrix::from_entries(n, std::move(u1));

  // Stage 2: diagonalize the torsion block M_ij = T'^j_{in} on the first
  // n-1 legs.  M transforms by W -> conj(W) M W^T, so the diagonalizer is
  // the transpose of the eigenvector matrix.
  const StructureEquations S1 = change_frame(e.S(), U1);
  const Engine e1(S1);
  const int m = n - 1;
  std::vector<Cx> M(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      M[static_cast<std::size_t>(i) * m + j] = e1.torsion()(j, i, n - 1);
  const auto [V, d] = unitary_diagonalize_normal(M, m, tol);
  std::vector<Cx> u2(static_cast<std::size_t>(n) * n, Cx(0, 0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) u2[static_cast<std::size_t>(i) * n + j] = V(j, i);
  u2[static_cast<std::size_t>(n - 1) * n + (n - 1)] = Cx(1, 0);
  const UnitaryMatrix U = UnitaryMatrix::from_entries(n, std::move(u2)).multiply(U1);

  StructureEquations S2 = change_frame(e.S(), U);
  const Engine e2(S2);
  const Tensor& T2 = e2.torsion().T;

  std::vector<Cx> a(static_cast<std::size_t>(n), Cx(0, 0));
  for (int i = 0; i < m; ++i) a[static_cast<std::size_t>(i)] = T2(i, i, n - 1);

  std::map<std::string, double> res;
  double s = 0;
  for (int k = 0; k < n; ++k)
    detail::l2_accumulate(s, e2.derived().eta(k) - (k == n - 1 ? Cx(lambda, 0) : Cx(0, 0)));
  res["eta_alignment"] = std::sqrt(s);
  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) detail::l2_accumulate(s, T2(n - 1, i, j));
  res["torsion_row_n"] = std::sqrt(s);
  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      detail::l2_accumulate(s, T2(j, i, n - 1) - (i == j ? a[static_cast<std::size_t>(i)] : Cx(0, 0)));
  res["torsion_diagonal"] = std::sqrt(s);
  Cx trace(0, 0);
  for (const Cx& ai : a) trace += ai;
  res["trace_sum"] = std::abs(trace - Cx(lambda, 0));
  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        detail::l2_accumulate(s, (a[static_cast<std::size_t>(i)] + a[static_cast<std::size_t>(k)] -
                          a[static_cast<std::size_t>(j)]) *
                             T2(j, i, k));
  res["eigenvalue_compatibility"] = std::sqrt(s);

  return AdmissibleFrameData{U, lambda, std::move(a), std::move(S2), T2, std::move(res)};
}

/// Departure of the a_i from the common value lambda/(n-1): zero exactly in
/// the Vaisman case.  Companion route to is_vaisman for cross-checking.
inline double vaisman_eigenvalue_residual(const AdmissibleFrameData& adm) {
  const int n = adm.rotated.n();
  double s = 0;
  for (int i = 0; i + 1 < n; ++i)
    detail::l2_accumulate(s, adm.a[static_cast<std::size_t>(i)] - Cx(adm.lambda / (n - 1), 0));
  return std::sqrt(s);
}

/// All torsion components with both lower legs outside the eta direction
/// vanish.  Only defined through an admissible frame.
inline FlagResult has_degenerate_torsion(const AdmissibleFrameData& adm, double tol = kDefaultTol) {
  const int n = adm.rotated.n();
  double s = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i + 1 < n; ++i)
      for (int k = 0; k + 1 < n; ++k) detail::l2_accumulate(s, adm.torsion(j, i, k));
  return flag_from(std::sqrt(s), tol);
}

inline FlagResult has_degenerate_torsion(const Engine& e, double tol = kDefaultTol) {
  return has_degenerate_torsion(admissible_frame(e, tol), tol);
}

/// Chern-antiholomorphic derivative of the dual torsion field chi; its
/// vanishing makes chi a holomorphic vector field.
inline double chi_holomorphy_residual(const Engine& e) {
  const int n = e.n();
  double s = 0;
  for (int k = 0; k < n; ++k)
    for (int mdir = 0; mdir < n; ++mdir) {
      Cx acc(0, 0);
      for (int r = 0; r < n; ++r)
        acc += std::conj(e.derived().eta(r)) * e.chern().eval(r, k, n + mdir);
      detail::l2_accumulate(s, acc);
    }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------- //
// identity block for parallel-torsion structures

/// Pointwise identities that hold on every structure with Bismut-parallel
/// torsion, keyed by content.  Requires is_btp_direct to pass.
inline std::map<std::string, double> prop15_identities(const Engine& e,
                                                       double tol = kDefaultTol) {
  const FlagResult btp = is_btp_direct(e, tol);
  if (btp.verdict != Verdict::True)
    fail(ErrorCode::PreconditionFailed,
         "identity block needs Bismut-parallel torsion (residual " +
             std::to_string(btp.residual) + ")");
  const int n = e.n();
  const Tensor& T = e.torsion().T;
  const DerivedTensors& D = e.derived();
  const Tensor& R11b = e.bismut_curvature().R11;
  const Tensor& R11c = e.chern_curvature().R11;
  std::map<std::string, double> out;
  double s;

  // Jacobi-type quadratic torsion identity.
  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Cx acc(0, 0);
          for (int r = 0; r < n; ++r)
            acc += T(r, i, j) * T(l, r, k) + T(r, j, k) * T(l, r, i) + T(r, k, i) * T(l, r, j);
          detail::l2_accumulate(s, acc);
        }
  out["torsion_jacobi"] = std::sqrt(s);

  // 2 sum T A = sum T B with one free lower index.
  s = 0;
  for (int i = 0; i < n; ++i) {
    Cx acc(0, 0);
    for (int r = 0; r < n; ++r)
      for (int si = 0; si < n; ++si)
        acc += T(r, si, i) * (Cx(2, 0) * D.A(r, si) - D.B(r, si));
    detail::l2_accumulate(s, acc);
  }
  out["trace_pairing"] = std::sqrt(s);

  // Q expressed through torsion products (stored with the opposite sign).
  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) detail::l2_accumulate(s, D.Q(i, j, k, l) + D.P(j, l, i, k));
  out["Q_from_torsion"] = std::sqrt(s);

  // d eta splits: no (2,0) part, and the (1,1) part is minus the
  // conjugated phi pairing.
  InvariantForm etaf = eta_form(e);
  out["del_eta"] = e.S().d(etaf).bidegree_part(2, 0).l2();
  InvariantForm dbar_eta = e.S().d(etaf).bidegree_part(1, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dbar_eta.add_term({i, n + j}, std::conj(D.phi(j, i)));
  out["dbar_eta"] = dbar_eta.l2();

  // Gap between Bismut and Chern (1,1) curvature blocks.
  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Cx acc = R11b(i, j, k, l) - R11c(i, j, k, l);
          for (int r = 0; r < n; ++r)
            acc -= T(l, i, r) * std::conj(T(k, j, r)) - T(r, i, k) * std::conj(T(r, j, l)) -
                   T(j, i, r) * std::conj(T(k, l, r)) - T(l, k, r) * std::conj(T(i, j, r));
          detail::l2_accumulate(s, acc);
        }
  out["curvature_gap"] = std::sqrt(s);

  // phi against torsion.
  s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Cx acc(0, 0);
        for (int r = 0; r < n; ++r)
          acc += D.phi(i, r) * T(j, r, k) + D.phi(k, r) * T(j, i, r) - D.phi(r, j) * T(r, i, k);
        detail::l2_accumulate(s, acc);
      }
  out["phi_torsion"] = std::sqrt(s);

  // The four derived matrices commute pairwise.
  auto commutator = [&](const Tensor& X, const Tensor& Y) {
    double acc = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Cx c(0, 0);
        for (int r = 0; r < n; ++r) c += X(i, r) * Y(r, j) - Y(i, r) * X(r, j);
        detail::l2_accumulate(acc, c);
      }
    return std::sqrt(acc);
  };
  out["comm_AB"] = commutator(D.A, D.B);
  out["comm_Aphi"] = commutator(D.A, D.phi);
  out["comm_Bphi"] = commutator(D.B, D.phi);
  out["comm_phi_phistar"] = commutator(D.phi, D.phi_star);

  // eta contracts torsion to zero.
  s = 0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      Cx acc(0, 0);
      for (int r = 0; r < n; ++r) acc += D.eta(r) * T(r, i, k);
      detail::l2_accumulate(s, acc);
    }
  out["eta_torsion_trace"] = std::sqrt(s);

  // Scalar pairing 2 <phi, A> = <phi, B>.
  Cx phiA(0, 0), phiB(0, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      phiA += D.phi(j, i) * D.A(i, j);
      phiB += D.phi(j, i) * D.B(i, j);
    }
  out["scalar_pairing"] = std::abs(Cx(2, 0) * phiA - phiB);

  out["Q_parallel"] = e.covariant_derivative(D.Q, e.bismut()).frobenius();
  out["ricQ_decomposition"] = D.ricq_identity_residual;

  // del dbar omega^{n-1} agrees with (eta wedge conj eta + dbar eta) wedge
  // omega^{n-1}.
  InvariantForm wn1 = wedge_power(omega(e.S()), n - 1);
  InvariantForm lhs = e.S().d(e.S().d(wn1).bidegree_part(n - 1, n)).bidegree_part(n, n);
  InvariantForm factor = wedge(etaf, etaf.conjugated());
  factor += e.S().d(etaf).bidegree_part(1, 1);
  out["gauduchon_identity"] = (lhs - wedge(factor, wn1)).l2();

  return out;
}

// ---------------------------------------------------------------------- //
// threefold case analysis

enum class ThreefoldCase { Case1, Case2, Case3, NotApplicable, Indeterminate };

inline const char* threefold_case_name(ThreefoldCase c) {
  switch (c) {
    case ThreefoldCase::Case1: return "Case1";
    case ThreefoldCase::Case2: return "Case2";
    case ThreefoldCase::Case3: return "Case3";
    case ThreefoldCase::NotApplicable: return "NotApplicable";
    case ThreefoldCase::Indeterminate: return "Indeterminate";
  }
  return "?";
}

struct ThreefoldReport {
  ThreefoldCase label = ThreefoldCase::NotApplicable;
  Cx s{0, 0};  // a_1 conj(a_2) + conj(a_1) a_2
  Cx t{0, 0};  // a_1 conj(a_2) - conj(a_1) a_2
  std::vector<Cx> a;
  double lambda = 0;
  FlagResult bkl{Verdict::Indeterminate, 0};
  bool case1_matches_bkl = false;
};

namespace detail {
inline ThreefoldReport threefold_from(const AdmissibleFrameData& adm, const Engine& e,
                                      double tol) {
  const Cx a1 = adm.a[0];
  const Cx a2 = adm.a[1];
  ThreefoldReport out;
  out.s = a1 * std::conj(a2) + std::conj(a1) * a2;
  out.t = a1 * std::conj(a2) - std::conj(a1) * a2;
  out.a = adm.a;
  out.lambda = adm.lambda;
  const double as = std::abs(out.s);
  const double at = std::abs(out.t);
  if (as < tol) {
    out.label = ThreefoldCase::Case1;
  } else if (as < 10 * tol) {
    fail(ErrorCode::Indeterminate, "discriminant |s| lies in the ambiguous band");
  } else if (at < tol) {
    // |s| >= 10 tol already forces both a_i away from zero here.
    out.label = ThreefoldCase::Case3;
  } else if (at < 10 * tol) {
    fail(ErrorCode::Indeterminate, "discriminant |t| lies in the ambiguous band");
  } else {
    out.label = ThreefoldCase::Case2;
  }
  out.bkl = is_bkl(e, tol);
  out.case1_matches_bkl = (out.label == ThreefoldCase::Case1) == out.bkl.is_true();
  return out;
}
}  // namespace detail

/// Case split of non-balanced parallel-torsion threefolds by the two
/// discriminants built from the admissible eigenvalues: Case1 |s| = 0
/// (the full Kaehler-symmetry case), Case3 s != 0 with both a_i real
/// (t = 0), Case2 otherwise.
inline ThreefoldReport threefold_case(const Engine& e, double tol = kDefaultTol) {
  if (e.n() != 3)
    fail(ErrorCode::NotApplicable, "case analysis is specific to threefolds");
  const FlagResult bal = is_balanced(e, tol);
  if (bal.verdict == Verdict::True)
    fail(ErrorCode::NotApplicable, "case analysis needs a non-balanced structure");
  if (bal.verdict == Verdict::Indeterminate)
    fail(ErrorCode::Indeterminate, "|eta| lies in the ambiguous band");
  return detail::threefold_from(admissible_frame(e, tol), e, tol);
}

// ---------------------------------------------------------------------- //
// Bismut-abelian certificate

/// Certifies that some constant unitary frame simultaneously diagonalizes
/// the Bismut connection and curvature.  A *-closed family of matrices
/// admits a common unitary eigenbasis exactly when it commutes pairwise,
/// so the residual aggregates every pairwise commutator of the coefficient
/// matrices of theta^b (per direction) and Theta^b (per 2-form monomial)
/// together with their adjoints.  The squared sum is invariant under
/// unitary frame changes, which a per-frame off-diagonality test is not.
inline FlagResult bismut_abelian_certificate(const Engine& e, double tol = kDefaultTol) {
  const int n = e.n();
  std::vector<Eigen::MatrixXcd> fam;
  for (int d = 0; d < 2 * n; ++d) {
    Eigen::MatrixXcd C(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) C(i, j) = e.bismut().eval(i, j, d);
    fam.push_back(C);
  }
  const Tensor& R11 = e.bismut_curvature().R11;
  const Tensor& R20 = e.bismut_curvature().R20;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Eigen::MatrixXcd C(n, n);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) C(k, l) = R11(i, j, k, l);
      fam.push_back(C);
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Eigen::MatrixXcd C20(n, n), C02(n, n);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          C20(k, l) = R20(i, j, k, l);
          C02(k, l) = -std::conj(R20(i, j, l, k));
        }
      fam.push_back(C20);
      fam.push_back(C02);
    }
  const std::size_t base = fam.size();
  for (std::size_t p = 0; p < base; ++p) fam.push_back(fam[p].adjoint());
  double s = 0;
  for (std::size_t p = 0; p < fam.size(); ++p)
    for (std::size_t q = p + 1; q < fam.size(); ++q)
      s += (fam[p] * fam[q] - fam[q] * fam[p]).squaredNorm();
  return flag_from(std::sqrt(s), tol);
}

// ---------------------------------------------------------------------- //
// aggregate classification

struct ClassificationReport {
  std::string name;
  int n = 0;
  double tolerance = kDefaultTol;
  /// Fixed key order: balanced, gauduchon, pluriclosed, btp_direct,
  /// btp_thm11, bkl, vaisman, lcb, lck, lp, gce, degenerate_torsion,
  /// bismut_abelian_certificate.
  std::vector<std::pair<std::string, FlagResult>> flags;
  ThreefoldCase threefold = ThreefoldCase::NotApplicable;
  Cx threefold_s{0, 0}, threefold_t{0, 0};
  Cx lp_constant{0, 0};

  const FlagResult& flag(const std::string& key) const {
    for (const auto& kv : flags)
      if (kv.first == key) return kv.second;
    fail(ErrorCode::InvalidParameter, "unknown flag: " + key);
  }
  bool is(const std::string& key) const { return flag(key).verdict == Verdict::True; }
};

inline ClassificationReport classify(const StructureEquations& S, double tol = kDefaultTol) {
  const Engine e(S);
  ClassificationReport r;
  r.name = e.S().name();
  r.n = e.n();
  r.tolerance = tol;
  auto put = [&r](const char* k, FlagResult f) { r.flags.emplace_back(k, f); };

  const FlagResult bal = is_balanced(e, tol);
  put("balanced", bal);
  put("gauduchon", is_gauduchon(e, tol));
  put("pluriclosed", is_pluriclosed(e, tol));
  const FlagResult btp = is_btp_direct(e, tol);
  put("btp_direct", btp);
  put("btp_thm11", theorem11_conditions(e, tol).flag());
  put("bkl", is_bkl(e, tol));
  put("vaisman", is_vaisman(e, tol));
  put("lcb", is_lcb(e, tol));
  put("lck", is_lck(e, tol));
  const LpData lp = lp_analysis(e, tol);
  put("lp", lp.flag);
  r.lp_constant = lp.c;
  put("gce", flag_and(lp.flag, btp));

  const bool admissible_ok = bal.verdict == Verdict::False && btp.verdict == Verdict::True;
  if (admissible_ok) {
    const AdmissibleFrameData adm = admissible_frame(e, tol);
    put("degenerate_torsion", has_degenerate_torsion(adm, tol));
    if (e.n() == 3) {
      try {
        const ThreefoldReport tr = detail::threefold_from(adm, e, tol);
        r.threefold = tr.label;
        r.threefold_s = tr.s;
        r.threefold_t = tr.t;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::Indeterminate) throw;
        r.threefold = ThreefoldCase::Indeterminate;
      }
    }
  } else {
    put("degenerate_torsion", FlagResult{Verdict::False, -1.0});
  }
  put("bismut_abelian_certificate", bismut_abelian_certificate(e, tol));
  return r;
}

// ---------------------------------------------------------------------- //
// consistency sweep: parallel torsion + pluriclosed == full Kaehler
// symmetry of the Bismut curvature, entry by entry

struct CorollarySweepEntry {
  std::string name;
  Verdict btp = Verdict::Indeterminate;
  Verdict pluriclosed = Verdict::Indeterminate;
  Verdict bkl = Verdict::Indeterminate;
  bool consistent = false;
};

struct CorollarySweepReport {
  std::vector<CorollarySweepEntry> entries;
  int violations = 0;
  bool all_consistent = true;
};

inline CorollarySweepReport corollary_sweep(const std::vector<StructureEquations>& batch,
                                            double tol = kDefaultTol) {
  CorollarySweepReport rep;
  for (const StructureEquations& S : batch) {
    const Engine e(S);
    CorollarySweepEntry row;
    row.name = S.name();
    row.btp = is_btp_direct(e, tol).verdict;
    row.pluriclosed = is_pluriclosed(e, tol).verdict;
    row.bkl = is_bkl(e, tol).verdict;
    const bool both = row.btp == Verdict::True && row.pluriclosed == Verdict::True;
    const bool anyfalse = row.btp == Verdict::False || row.pluriclosed == Verdict::False;
    if (row.bkl == Verdict::True)
      row.consistent = both;
    else if (row.bkl == Verdict::False)
      row.consistent = anyfalse;
    else
      row.consistent = false;
    if (!row.consistent) {
      ++rep.violations;
      rep.all_consistent = false;
    }
    rep.entries.push_back(std::move(row));
  }
  return rep;
}

// StructureEquations conveniences ----------------------------------------

inline FlagResult is_balanced(const StructureEquations& S, double tol = kDefaultTol) {
  return is_balanced(Engine(S), tol);
}
inline FlagResult is_btp_direct(const StructureEquations& S, double tol = kDefaultTol) {
  return is_btp_direct(Engine(S), tol);
}
inline Theorem11Conditions theorem11_conditions(const StructureEquations& S,
                                                double tol = kDefaultTol) {
  return theorem11_conditions(Engine(S), tol);
}
inline std::map<std::string, double> prop15_identities(const StructureEquations& S,
                                                       double tol = kDefaultTol) {
  return prop15_identities(Engine(S), tol);
}
inline AdmissibleFrameData admissible_frame(const StructureEquations& S,
                                            double tol = kDefaultTol) {
  return admissible_frame(Engine(S), tol);
}
inline FlagResult is_bkl(const StructureEquations& S, double tol = kDefaultTol) {
  return is_bkl(Engine(S), tol);
}
inline FlagResult is_vaisman(const StructureEquations& S, double tol = kDefaultTol) {
  return is_vaisman(Engine(S), tol);
}
inline FlagResult is_lcb(const StructureEquations& S, double tol = kDefaultTol) {
  return is_lcb(Engine(S), tol);
}
inline FlagResult is_lck(const StructureEquations& S, double tol = kDefaultTol) {
  return is_lck(Engine(S), tol);
}
inline FlagResult is_lp(const StructureEquations& S, double tol = kDefaultTol) {
  return is_lp(Engine(S), tol);
}
inline FlagResult has_degenerate_torsion(const StructureEquations& S,
                                         double tol = kDefaultTol) {
  return has_degenerate_torsion(Engine(S), tol);
}
inline ThreefoldReport threefold_case(const StructureEquations& S, double tol = kDefaultTol) {
  return threefold_case(Engine(S), tol);
}
inline FlagResult bismut_abelian_certificate(const StructureEquations& S,
                                             double tol = kDefaultTol) {
  return bismut_abelian_certificate(Engine(S), tol);
}

}  // namespace btp
