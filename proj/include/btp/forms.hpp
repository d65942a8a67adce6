#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "btp/core.hpp"
#include "btp/tensor.hpp"

namespace btp {

/// Generators are numbered 0..2n-1: id i < n is the (1,0) coframe element
/// phi_{i+1}, id n+i is its conjugate.  A monomial is a strictly increasing
/// id list; the sign of any reordering is absorbed into the coefficient.
using Monomial = std::vector<std::uint8_t>;

inline int monomial_holo_count(const Monomial& m, int n) {
  int p = 0;
  for (std::uint8_t g : m)
    if (g < n) ++p;
  return p;
}

/// Left-invariant complex differential form: sparse map from sorted wedge
/// monomials to coefficients.  Coefficients below 1e-14 are dropped.
class InvariantForm {
 public:
  InvariantForm() = default;
  // Degrees above 2n are representable but necessarily empty (every wedge
  // monomial repeats a generator); allowing them up to 2n+2 lets d and
  // wedge return honest zeros at the top of the algebra.
  InvariantForm(int n, int degree) : n_(n), degree_(degree) {
    if (n < 1 || n > kMaxDim || degree < 0 || degree > 2 * n + 2)
      fail(ErrorCode::DimensionMismatch, "form shape out of range");
  }

  int n() const { return n_; }
  int degree() const { return degree_; }
  const std::map<Monomial, Cx>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Adds coeff * (generator wedge product in the given order); sorts the
  /// ids, picking up the permutation sign, and kills repeated generators.
  void add_term(std::vector<int> gens, Cx coeff) {
    if (static_cast<int>(gens.size()) != degree_)
      fail(ErrorCode::DimensionMismatch, "term degree mismatch");
    int sign = 1;
    for (std::size_t a = 1; a < gens.size(); ++a) {
      int v = gens[a];
      std::size_t b = a;
      while (b > 0 && gens[b - 1] > v) {
        gens[b] = gens[b - 1];
        --b;
        sign = -sign;
      }
      gens[b] = v;
    }
    for (std::size_t a = 0; a + 1 < gens.size(); ++a)
      if (gens[a] == gens[a + 1]) return;
    for (int g : gens)
      if (g < 0 || g >= 2 * n_) fail(ErrorCode::DimensionMismatch, "generator id out of range");
    Monomial key(gens.begin(), gens.end());
    Cx& slot = terms_[key];
    slot += static_cast<double>(sign) * coeff;
    if (std::abs(slot) <= kCoeffDrop) terms_.erase(key);
  }

  Cx coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Cx(0, 0) : it->second;
  }

  InvariantForm& operator+=(const InvariantForm& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) {
      Cx& slot = terms_[m];
      slot += c;
      if (std::abs(slot) <= kCoeffDrop) terms_.erase(m);
    }
    return *this;
  }
  InvariantForm& operator-=(const InvariantForm& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) {
      Cx& slot = terms_[m];
      slot -= c;
      if (std::abs(slot) <= kCoeffDrop) terms_.erase(m);
    }
    return *this;
  }
  InvariantForm& operator*=(Cx s) {
    if (std::abs(s) <= kCoeffDrop) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }
  friend InvariantForm operator+(InvariantForm a, const InvariantForm& b) { return a += b; }
  friend InvariantForm operator-(InvariantForm a, const InvariantForm& b) { return a -= b; }
  friend InvariantForm operator*(Cx s, InvariantForm a) { return a *= s; }

  /// Complex conjugate: swaps barred and unbarred generators, conjugates
  /// coefficients, resorts with sign.
  InvariantForm conjugated() const {
    InvariantForm out(n_, degree_);
    for (const auto& [m, c] : terms_) {
      std::vector<int> gens;
      gens.reserve(m.size());
      for (std::uint8_t g : m) gens.push_back(g < n_ ? g + n_ : g - n_);
      out.add_term(std::move(gens), std::conj(c));
    }
    return out;
  }

  bool has_pure_bidegree() const {
    int p0 = -1;
    for (const auto& [m, c] : terms_) {
      (void)c;
      int p = monomial_holo_count(m, n_);
      if (p0 < 0) p0 = p;
      else if (p != p0) return false;
    }
    return true;
  }

  /// (p,q) shared by all stored monomials; empty forms report (0, degree)
  /// purely as a placeholder.
  std::pair<int, int> bidegree() const {
    if (!has_pure_bidegree()) fail(ErrorCode::MixedBidegree, "form mixes bidegrees");
    if (terms_.empty()) return {0, degree_};
    int p = monomial_holo_count(terms_.begin()->first, n_);
    return {p, degree_ - p};
  }

  InvariantForm bidegree_part(int p, int q) const {
    if (p + q != degree_) fail(ErrorCode::DimensionMismatch, "bidegree does not sum to degree");
    InvariantForm out(n_, degree_);
    for (const auto& [m, c] : terms_)
      if (monomial_holo_count(m, n_) == p) out.terms_[m] = c;
    return out;
  }

  double l2() const {
    double s = 0;
    for (const auto& [m, c] : terms_) {
      (void)m;
      s += std::norm(c);
    }
    return std::sqrt(s);
  }

  double max_abs_coeff() const {
    double s = 0;
    for (const auto& [m, c] : terms_) {
      (void)m;
      s = std::max(s, std::abs(c));
    }
    return s;
  }

 private:
  void check_same(const InvariantForm& o) const {
    if (n_ != o.n_ || degree_ != o.degree_)
      fail(ErrorCode::DimensionMismatch, "form shape mismatch");
  }

  int n_ = 0;
  int degree_ = 0;
  std::map<Monomial, Cx> terms_;
};

using Form = InvariantForm;

inline InvariantForm wedge(const InvariantForm& a, const InvariantForm& b) {
  if (a.n() != b.n()) fail(ErrorCode::DimensionMismatch, "wedge dimension mismatch");
  InvariantForm out(a.n(), a.degree() + b.degree());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      std::vector<int> gens;
      gens.reserve(ma.size() + mb.size());
      for (std::uint8_t g : ma) gens.push_back(g);
      for (std::uint8_t g : mb) gens.push_back(g);
      out.add_term(std::move(gens), ca * cb);
    }
  return out;
}

inline InvariantForm wedge_power(const InvariantForm& a, int k) {
  InvariantForm out(a.n(), 0);
  out.add_term({}, Cx(1, 0));
  for (int i = 0; i < k; ++i) out = wedge(out, a);
  return out;
}

struct ValidationReport {
  double max_d2 = 0.0;   // largest |coefficient| of any d(d phi_k)
  bool passed = false;   // max_d2 < 1e-10
  bool integrable = false;  // no phibar-phibar terms in any d phi_k
  int worst_k = -1;          // 0-based row realizing max_d2
  std::string worst_term;    // its monomial, spelled in generators
};

/// Structure constants of an invariant unitary coframe:
///   d phi_k = sum_{i<j} E[k][i][j] phi_i phi_j
///           + sum_{i,j}  F[k][i][j] phi_i conj(phi_j)
///           + sum_{i<j}  G[k][i][j] conj(phi_i) conj(phi_j).
/// The metric is the identity in this coframe and omega = i sum phi_i
/// wedge conj(phi_i).  add_* take 1-based labels matching that notation;
/// component accessors are 0-based.
class StructureEquations {
 public:
  explicit StructureEquations(int n, std::string name = "")
      : n_(n),
        name_(std::move(name)),
        E_({n, n, n}, {Axis::Upper, Axis::Lower, Axis::Lower}),
        F_({n, n, n}, {Axis::Upper, Axis::Lower, Axis::LowerBar}),
        G_({n, n, n}, {Axis::Upper, Axis::LowerBar, Axis::LowerBar}) {
    if (n < 2 || n > kMaxDim)
      fail(ErrorCode::DimensionMismatch, "complex dimension must be 2..8");
  }

  int n() const { return n_; }
  const std::string& name() const { return name_; }
  void set_name(std::string s) { name_ = std::move(s); }

  void add_pp(int k, int i, int j, Cx c) {
    check_labels(k, i, j);
    if (i == j) fail(ErrorCode::InvalidParameter, "repeated generator in a wedge term");
    E_(k - 1, i - 1, j - 1) += c;
    E_(k - 1, j - 1, i - 1) -= c;
    touch();
  }
  void add_pm(int k, int i, int j, Cx c) {
    check_labels(k, i, j);
    F_(k - 1, i - 1, j - 1) += c;
    touch();
  }
  void add_mm(int k, int i, int j, Cx c) {
    check_labels(k, i, j);
    if (i == j) fail(ErrorCode::InvalidParameter, "repeated generator in a wedge term");
    G_(k - 1, i - 1, j - 1) += c;
    G_(k - 1, j - 1, i - 1) -= c;
    touch();
  }

  Cx E(int k, int i, int j) const { return E_(k, i, j); }
  Cx F(int k, int i, int j) const { return F_(k, i, j); }
  Cx G(int k, int i, int j) const { return G_(k, i, j); }
  const Tensor& E_tensor() const { return E_; }
  const Tensor& F_tensor() const { return F_; }
  const Tensor& G_tensor() const { return G_; }

  /// d phi_k (0-based k) straight from the stored tables.
  InvariantForm dphi(int k) const {
    InvariantForm out(n_, 2);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        out.add_term({i, j}, E_(k, i, j));
        out.add_term({n_ + i, n_ + j}, G_(k, i, j));
      }
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) out.add_term({i, n_ + j}, F_(k, i, j));
    return out;
  }

  /// d of a generator id (0..2n-1); conjugate generators get the conjugated
  /// expansion.
  InvariantForm dgen(int g) const {
    return g < n_ ? dphi(g) : dphi(g - n_).conjugated();
  }

  /// Exterior derivative by the antiderivation rule: each generator is
  /// replaced in place by its two-generator expansion with the alternating
  /// factor (-1)^t from moving d past the first t generators; add_term's
  /// sorted-insertion sign handles the rest of the reordering.
  InvariantForm d(const InvariantForm& a) const {
    ensure_validated();
    return d_unchecked(a);
  }

  ValidationReport validate() {
    ValidationReport rep;
    for (int k = 0; k < n_; ++k) {
      InvariantForm d2 = d_unchecked(dphi(k));
      for (const auto& [mono, c] : d2.terms()) {
        if (std::abs(c) <= rep.max_d2) continue;
        rep.max_d2 = std::abs(c);
        rep.worst_k = k;
        std::string spell;
        for (std::uint8_t g : mono) {
          if (!spell.empty()) spell += "^";
          spell += (g < n_) ? "phi_" + std::to_string(g + 1)
                            : "phibar_" + std::to_string(g - n_ + 1);
        }
        rep.worst_term = spell;
      }
    }
    rep.passed = rep.max_d2 < 1e-10;
    rep.integrable = G_.max_abs() == 0.0;
    validated_ = rep.passed;
    integrable_ = rep.integrable;
    report_ = rep;
    return rep;
  }

  bool is_validated() const { return validated_; }
  bool is_integrable() const { return validated_ && integrable_; }
  const ValidationReport& report() const { return report_; }

  void ensure_validated() const {
    if (!validated_)
      fail(ErrorCode::NotValidated, "structure equations not validated (run validate, require d^2 = 0)");
  }
  /// Geometric operations additionally require integrability (G == 0).
  void ensure_geometric() const {
    ensure_validated();
    if (!integrable_)
      fail(ErrorCode::NotValidated, "integrability violated: nonzero (0,2) part in the structure equations");
  }

 private:
  InvariantForm d_unchecked(const InvariantForm& a) const {
    InvariantForm out(n_, a.degree() + 1);
    for (const auto& [m, c] : a.terms()) {
      for (std::size_t t = 0; t < m.size(); ++t) {
        const double sgn = (t % 2 == 0) ? 1.0 : -1.0;
        const InvariantForm dg = dgen(m[t]);
        for (const auto& [mg, cg] : dg.terms()) {
          std::vector<int> gens;
          gens.reserve(m.size() + 1);
          for (std::size_t s = 0; s < m.size(); ++s) {
            if (s == t) {
              gens.push_back(mg[0]);
              gens.push_back(mg[1]);
            } else {
              gens.push_back(m[s]);
            }
          }
          out.add_term(std::move(gens), sgn * c * cg);
        }
      }
    }
    return out;
  }

  void check_labels(int k, int i, int j) const {
    if (k < 1 || k > n_ || i < 1 || i > n_ || j < 1 || j > n_)
      fail(ErrorCode::InvalidParameter, "generator label out of range (labels are 1-based)");
  }
  void touch() {
    validated_ = false;
    integrable_ = false;
  }

  int n_;
  std::string name_;
  Tensor E_, F_, G_;
  bool validated_ = false;
  bool integrable_ = false;
  ValidationReport report_;
};

/// Fundamental form omega = i sum_k phi_k wedge conj(phi_k).
inline InvariantForm omega(const StructureEquations& S) {
  InvariantForm w(S.n(), 2);
  for (int k = 0; k < S.n(); ++k) w.add_term({k, S.n() + k}, Cx(0, 1));
  return w;
}

/// Splits d(a) of a bidegree-pure form into (del a, dbar a) = the
/// (p+1,q) and (p,q+1) parts; on integrable structures these exhaust d(a).
inline std::pair<InvariantForm, InvariantForm> dbar_del_split(const StructureEquations& S,
                                                              const InvariantForm& a) {
  S.ensure_geometric();
  if (!a.has_pure_bidegree()) fail(ErrorCode::MixedBidegree, "split needs a bidegree-pure form");
  auto [p, q] = a.bidegree();
  InvariantForm da = S.d(a);
  return {da.bidegree_part(p + 1, q), da.bidegree_part(p, q + 1)};
}

/// l2 coefficient norm of del dbar (omega^(n-1)); vanishes for Gauduchon
/// metrics.
inline double gauduchon_check(const StructureEquations& S) {
  S.ensure_geometric();
  const int n = S.n();
  InvariantForm w = wedge_power(omega(S), n - 1);
  InvariantForm dbar_w = S.d(w).bidegree_part(n - 1, n);
  return S.d(dbar_w).bidegree_part(n, n).l2();
}

/// l2 coefficient norm of del dbar omega; vanishes for pluriclosed metrics.
inline double pluriclosed_check(const StructureEquations& S) {
  S.ensure_geometric();
  InvariantForm dbar_w = S.d(omega(S)).bidegree_part(1, 2);
  return S.d(dbar_w).bidegree_part(2, 2).l2();
}

/// Structure equations of the rotated coframe phi' = U phi.  The three
/// coefficient tables transform as tensors of their declared axis kinds.
inline StructureEquations change_frame(const StructureEquations& S, const UnitaryMatrix& U) {
  S.ensure_validated();
  StructureEquations out(S.n(), S.name().empty() ? "" : S.name() + "'");
  Tensor E2 = change_frame(S.E_tensor(), U);
  Tensor F2 = change_frame(S.F_tensor(), U);
  Tensor G2 = change_frame(S.G_tensor(), U);
  for (int k = 0; k < S.n(); ++k)
    for (int i = 0; i < S.n(); ++i)
      for (int j = 0; j < S.n(); ++j) {
        if (i < j) {
          if (std::abs(E2(k, i, j)) > kCoeffDrop) out.add_pp(k + 1, i + 1, j + 1, E2(k, i, j));
          if (std::abs(G2(k, i, j)) > kCoeffDrop) out.add_mm(k + 1, i + 1, j + 1, G2(k, i, j));
        }
        if (std::abs(F2(k, i, j)) > kCoeffDrop) out.add_pm(k + 1, i + 1, j + 1, F2(k, i, j));
      }
  ValidationReport rep = out.validate();
  if (!rep.passed)
    fail(ErrorCode::ValidationFailed, "frame change broke d^2 = 0; input was inconsistent");
  return out;
}

}  // namespace btp
