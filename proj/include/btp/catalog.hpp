#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "btp/classify.hpp"

namespace btp {

/// A named structure with the flags asserted for it and free-form notes.
/// `expected` is a partial view: only independently known flags appear.
/// Keys are ClassificationReport keys plus "btp" (the direct flag),
/// "chern_flat", "ricq_zero" and "q_nonzero".
struct CatalogEntry {
  std::string name;
  StructureEquations S;
  std::map<std::string, bool> expected;
  std::string notes;
};

namespace detail {

inline std::string real_label(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline std::string cx_label(Cx z) {
  if (z.imag() == 0) return real_label(z.real());
  std::string im = z.imag() == 1    ? "i"
                   : z.imag() == -1 ? "-i"
                                    : real_label(z.imag()) + "i";
  if (z.real() == 0) return im;
  return real_label(z.real()) + (z.imag() > 0 ? "+" : "") + im;
}

}  // namespace detail

/// Two-step construction with abelian first layer and diagonal mixed
/// terms: d phi_i = 0 for i <= r, d phi_alpha = sum_i Y[alpha][i]
/// phi_i wedge conj(phi_i).  Always validates.
inline StructureEquations nilmanifold(int r, int n, const std::vector<std::vector<Cx>>& Y,
                                      std::string name = "") {
  if (r < 1 || r > n) fail(ErrorCode::PreconditionFailed, "nilmanifold requires 1 <= r <= n");
  if (static_cast<int>(Y.size()) != n - r)
    fail(ErrorCode::ShapeMismatch, "Y needs one row per non-closed generator");
  for (const auto& row : Y)
    if (static_cast<int>(row.size()) != r)
      fail(ErrorCode::ShapeMismatch, "Y rows need one entry per closed generator");
  if (name.empty())
    name = "nilmanifold(" + std::to_string(r) + "," + std::to_string(n) + ")";
  StructureEquations S(n, std::move(name));
  for (int al = r + 1; al <= n; ++al)
    for (int i = 1; i <= r; ++i) {
      const Cx y = Y[static_cast<std::size_t>(al - r - 1)][static_cast<std::size_t>(i - 1)];
      if (y != Cx(0, 0)) S.add_pm(al, i, i, y);
    }
  S.validate();
  return S;
}

/// The diagonal threefold family d phi_3 = a phi_1 conj(phi_1) +
/// b phi_2 conj(phi_2).  Its flags have closed forms in (a, b).
inline CatalogEntry family_ab(Cx a, Cx b) {
  if (a == Cx(0, 0)) fail(ErrorCode::InvalidParameter, "family_ab requires a != 0");
  StructureEquations S = nilmanifold(
      2, 3, {{a, b}}, "family(" + detail::cx_label(a) + "," + detail::cx_label(b) + ")");
  const bool balanced = std::abs(a + b) < 1e-12;
  const bool bkl = std::abs((a * std::conj(b)).real()) < 1e-12;
  const bool vaisman = std::abs(a - b) < 1e-12;
  return {S.name(),
          S,
          {{"balanced", balanced}, {"bkl", bkl}, {"vaisman", vaisman}, {"btp", true}},
          "two-step diagonal family; balanced iff b = -a, "
          "Bismut Kaehler-like iff Re(a conj(b)) = 0, Vaisman iff b = a"};
}

inline CatalogEntry n3_example() {
  StructureEquations S = nilmanifold(2, 3, {{Cx(1, 0), Cx(-1, 0)}}, "n3");
  return {S.name(),
          S,
          {{"balanced", true}, {"btp", true}, {"bkl", false}, {"vaisman", false}},
          "balanced member of the diagonal family with parallel torsion "
          "but curvature that is not Kaehler-like"};
}

inline CatalogEntry complexified_su2() {
  StructureEquations S(3, "su2c");
  S.add_pp(1, 2, 3, Cx(1, 0));
  S.add_pp(2, 1, 3, Cx(-1, 0));
  S.add_pp(3, 1, 2, Cx(1, 0));
  S.validate();
  return {S.name(),
          S,
          {{"balanced", true}, {"btp", true}, {"chern_flat", true}},
          "complex simple group with the Killing-form metric; the trace "
          "form vanishes and the Chern connection is flat"};
}

inline CatalogEntry ricq_counterexample5() {
  StructureEquations S =
      nilmanifold(4, 5, {{Cx(1, 2), Cx(1, -1), Cx(1, -1), Cx(0, 1)}}, "ricq5");
  return {S.name(),
          S,
          {{"btp", true}, {"ricq_zero", true}, {"q_nonzero", true}},
          "five-dimensional two-step structure whose Ricci contraction of "
          "Q vanishes while Q itself does not"};
}

/// Invariant model of a twisted product of two Sasakian 3-manifolds with
/// twist kappa = x + iy, y > 0.  The optional sigma constants feed the
/// undetermined connection forms sigma'_i = sum_k u_{ik} (phi_k -
/// conj-pair) (row-major 2x3); the result is re-validated because generic
/// constants break d^2 = 0.
inline CatalogEntry twisted_sasakian_model(double c1, double c2, Cx kappa,
                                           const std::vector<Cx>& sigma = {}) {
  if (!(c1 > 0) || !(c2 > 0))
    fail(ErrorCode::InvalidParameter, "twisted model requires c1 > 0 and c2 > 0");
  if (!(kappa.imag() > 0))
    fail(ErrorCode::InvalidParameter, "twisted model requires Im(kappa) > 0");
  if (!sigma.empty() && sigma.size() != 6)
    fail(ErrorCode::ShapeMismatch, "sigma takes six constants (two rows of three)");
  const double x = kappa.real(), y = kappa.imag();
  const double s2 = std::sqrt(2.0);
  StructureEquations S(3, "twisted(" + detail::real_label(c1) + "," + detail::real_label(c2) +
                              "," + detail::cx_label(kappa) + ")");
  S.add_pp(1, 1, 3, -(c1 / s2) * Cx(x, 1));
  S.add_pm(1, 1, 3, (c1 / s2) * Cx(x, -1));
  S.add_pp(2, 2, 3, Cx(-c2 * y / s2, 0));
  S.add_pm(2, 2, 3, Cx(c2 * y / s2, 0));
  S.add_pm(3, 1, 1, Cx(0, s2 * c1));
  S.add_pm(3, 2, 2, -(s2 * c2 / y) * Cx(1, x));
  if (!sigma.empty())
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 3; ++k) {
        const Cx u = sigma[static_cast<std::size_t>(3 * i + k)];
        if (u == Cx(0, 0)) continue;
        const int row = i + 1;
        if (k + 1 != row) S.add_pp(row, row, k + 1, u);
        S.add_pm(row, row, k + 1, -std::conj(u));
      }
  const ValidationReport rep = S.validate();
  if (!rep.passed)
    fail(ErrorCode::ValidationFailed,
         "d^2 != 0: coefficient of magnitude " + detail::real_label(rep.max_d2) +
             " at d^2 phi_" + std::to_string(rep.worst_k + 1) + " on " + rep.worst_term);
  std::map<std::string, bool> expected;
  if (sigma.empty()) expected = {{"balanced", false}, {"btp", true}};
  return {S.name(), S, expected,
          sigma.empty() ? "invariant twisted Sasakian product model"
                        : "twisted Sasakian product model with nonzero sigma constants; "
                          "no asserted flags"};
}

/// Deterministic two-step structure: closed generators 1..r, the rest
/// drawn from span{phi_i phi_j, phi_i conj(phi_j)} with the given term
/// density.  d^2 = 0 holds by construction for every draw.
inline StructureEquations random_2step(std::uint64_t seed, int n, int r, double density = 0.75) {
  if (r < 1 || r >= n) fail(ErrorCode::PreconditionFailed, "random_2step requires 1 <= r < n");
  std::mt19937_64 rng(seed);
  auto u01 = [&rng] { return std::ldexp(static_cast<double>(rng() >> 11), -53); };
  auto coeff = [&] {
    const double re = 2 * u01() - 1;
    const double im = 2 * u01() - 1;
    return Cx(re, im);
  };
  StructureEquations S(n, "random_2step(" + std::to_string(seed) + "," + std::to_string(n) +
                              "," + std::to_string(r) + ")");
  for (int al = r + 1; al <= n; ++al) {
    for (int i = 1; i <= r; ++i)
      for (int j = i + 1; j <= r; ++j)
        if (u01() < density) S.add_pp(al, i, j, coeff());
    for (int i = 1; i <= r; ++i)
      for (int j = 1; j <= r; ++j)
        if (u01() < density) S.add_pm(al, i, j, coeff());
  }
  S.validate();
  return S;
}

inline std::vector<CatalogEntry> standard_catalog() {
  std::vector<CatalogEntry> out;
  StructureEquations ab3 = nilmanifold(3, 3, {}, "abelian3");
  out.push_back({"abelian3",
                 ab3,
                 {{"balanced", true}, {"pluriclosed", true}, {"bkl", true}, {"btp", true}},
                 "abelian group, flat Kaehler metric"});
  out.push_back(n3_example());
  out.push_back(family_ab(Cx(1, 0), Cx(0, 1)));
  out.push_back(family_ab(Cx(1, 0), Cx(1, 0)));
  out.push_back(family_ab(Cx(1, 0), Cx(2, 0)));
  out.push_back(family_ab(Cx(1, 0), Cx(1, 1)));
  out.push_back(family_ab(Cx(2, -1), Cx(0, 0.5)));
  StructureEquations fn2 = nilmanifold(1, 2, {{Cx(1, 0)}}, "family_n2");
  out.push_back({"family_n2",
                 fn2,
                 {{"balanced", false}, {"vaisman", true}, {"btp", true}},
                 "two-dimensional analogue of the diagonal family; every "
                 "non-balanced member of this shape is Vaisman"});
  out.push_back(complexified_su2());
  out.push_back(ricq_counterexample5());
  out.push_back(twisted_sasakian_model(1, 1, Cx(0, 1)));
  out.push_back(twisted_sasakian_model(1, 1, Cx(1, 1)));
  out.push_back(twisted_sasakian_model(1.5, 0.7, Cx(-0.4, 1.1)));
  return out;
}

/// Re-classifies the entry and returns the expected keys that disagree.
/// "chern_flat", "ricq_zero" and "q_nonzero" are resolved from engine
/// tensors; "q_nonzero" uses a fixed order-one threshold far above every
/// pass band.
inline std::vector<std::string> expected_mismatches(const CatalogEntry& entry,
                                                    double tol = kDefaultTol) {
  const ClassificationReport rep = classify(entry.S, tol);
  const Engine e(entry.S);
  std::vector<std::string> bad;
  for (const auto& [key, want] : entry.expected) {
    bool got = false;
    if (key == "btp") {
      got = rep.is("btp_direct");
    } else if (key == "chern_flat") {
      const CurvatureTensor& R = e.chern_curvature();
      got = std::max(R.R11.max_abs(), R.R20.max_abs()) < 10 * tol;
    } else if (key == "ricq_zero") {
      got = e.derived().ricQ.max_abs() < 10 * tol;
    } else if (key == "q_nonzero") {
      got = e.derived().Q.max_abs() > 0.1;
    } else {
      got = rep.is(key);
    }
    if (got != want) bad.push_back(key);
  }
  return bad;
}

}  // namespace btp
