#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "btp/classify.hpp"

using btp::AdmissibleFrameData;
using btp::ClassificationReport;
using btp::Cx;
using btp::Engine;
using btp::Error;
using btp::ErrorCode;
using btp::FlagResult;
using btp::StructureEquations;
using btp::ThreefoldCase;
using btp::Verdict;

namespace {

double uniform01(std::mt19937_64& rng) { return std::ldexp(static_cast<double>(rng() >> 11), -53); }

Cx rand_cx(std::mt19937_64& rng) { return {2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1}; }

StructureEquations diag_family(Cx a, Cx b) {
  StructureEquations s(3, "diag");
  s.add_pm(3, 1, 1, a);
  s.add_pm(3, 2, 2, b);
  return s;
}

StructureEquations n3_structure() { return diag_family(Cx(1, 0), Cx(-1, 0)); }

StructureEquations su2c_structure() {
  StructureEquations s(3, "su2c");
  s.add_pp(1, 2, 3, Cx(1, 0));
  s.add_pp(2, 1, 3, Cx(-1, 0));
  s.add_pp(3, 1, 2, Cx(1, 0));
  return s;
}

StructureEquations random_2step(std::uint64_t seed, int n, int r) {
  std::mt19937_64 rng(seed);
  StructureEquations s(n, "rand2step");
  for (int a = r + 1; a <= n; ++a) {
    for (int i = 1; i <= r; ++i)
      for (int j = i + 1; j <= r; ++j) s.add_pp(a, i, j, rand_cx(rng));
    for (int i = 1; i <= r; ++i)
      for (int j = 1; j <= r; ++j) s.add_pm(a, i, j, rand_cx(rng));
  }
  return s;
}

// Two-step nilpotent structure with diagonal mixed terms d phi_a =
// sum_i Y[a][i] phi_i conj(phi_i); always has Bismut-parallel torsion.
StructureEquations diag_nil(int r, int n, const std::vector<std::vector<Cx>>& Y,
                            const std::string& name) {
  StructureEquations s(n, name);
  for (int a = r + 1; a <= n; ++a)
    for (int i = 1; i <= r; ++i) {
      const Cx y = Y[static_cast<std::size_t>(a - r - 1)][static_cast<std::size_t>(i - 1)];
      if (y != Cx(0, 0)) s.add_pm(a, i, i, y);
    }
  return s;
}

// Five-dimensional structure with vanishing Ric(Q) but nonzero Q.
StructureEquations ricq5_structure() {
  return diag_nil(4, 5, {{Cx(1, 2), Cx(1, -1), Cx(1, -1), Cx(0, 1)}}, "ricq5");
}

bool flags_match(const ClassificationReport& x, const ClassificationReport& y, double tol) {
  if (x.flags.size() != y.flags.size()) return false;
  for (std::size_t i = 0; i < x.flags.size(); ++i) {
    if (x.flags[i].first != y.flags[i].first) return false;
    if (x.flags[i].second.verdict != y.flags[i].second.verdict) return false;
    if (std::abs(x.flags[i].second.residual - y.flags[i].second.residual) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parameter family flags follow the closed form criteria") {
  // For d phi_3 = a phi_1 conj(phi_1) + b phi_2 conj(phi_2) the expected
  // classification is known exactly: balanced iff b = -a, full Kaehler
  // Bismut symmetry iff Re(conj(a) b) = 0, Vaisman iff b = a, parallel
  // torsion always.
  const Cx a(1, 0);
  std::vector<Cx> bs;
  for (double re : {-2.0, -1.0, 0.0, 1.0, 2.0})
    for (double im : {-1.0, 0.0, 1.0}) bs.emplace_back(re, im);
  bs.emplace_back(0.5, -1.5);

  for (const Cx& b : bs) {
    CAPTURE(b.real(), b.imag());
    ClassificationReport r = btp::classify(diag_family(a, b));
    const bool balanced = b == -a;
    const bool bkl = std::abs((std::conj(a) * b).real()) < 1e-14;
    const bool vaisman = b == a;
    REQUIRE(r.is("balanced") == balanced);
    REQUIRE(r.is("bkl") == bkl);
    REQUIRE(r.is("pluriclosed") == bkl);
    REQUIRE(r.is("vaisman") == vaisman);
    REQUIRE(r.is("btp_direct"));
    REQUIRE(r.is("btp_thm11"));
    REQUIRE(r.is("gauduchon"));
    if (!balanced) {
      REQUIRE(r.is("degenerate_torsion"));
      REQUIRE(r.is("lp"));
      REQUIRE(r.is("gce"));
    } else {
      REQUIRE(r.flag("degenerate_torsion").residual == -1.0);
    }
    REQUIRE(r.is("lck") == vaisman);
    REQUIRE(r.is("lcb") == (balanced || std::abs((std::conj(a) * b).imag()) < 1e-14));
  }
}

TEST_CASE("direct and curvature routes to parallel torsion agree") {
  std::vector<StructureEquations> batch;
  batch.push_back(StructureEquations(2, "abelian2"));
  batch.push_back(n3_structure());
  batch.push_back(su2c_structure());
  batch.push_back(ricq5_structure());
  batch.push_back(diag_family(Cx(1, 0), Cx(0, 1)));
  batch.push_back(diag_family(Cx(2, -1), Cx(0, 0.5)));
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    batch.push_back(random_2step(900 + seed, 2 + static_cast<int>(seed % 3), 1 + static_cast<int>(seed % 2)));

  for (StructureEquations& S : batch) {
    S.validate();
    Engine e(S);
    const FlagResult direct = btp::is_btp_direct(e);
    const btp::Theorem11Conditions t11 = btp::theorem11_conditions(e);
    CAPTURE(S.name(), direct.residual, t11.worst());
    REQUIRE(direct.verdict != Verdict::Indeterminate);
    REQUIRE(direct.verdict == t11.verdict);
  }
}

TEST_CASE("admissible frame produces the expected eigenvalue data") {
  SECTION("real parameters give real eigenvalues summing to lambda") {
    Engine e(diag_family(Cx(1, 0), Cx(2, 0)));
    AdmissibleFrameData adm = btp::admissible_frame(e);
    REQUIRE(adm.lambda == Catch::Approx(3.0).margin(1e-12));
    // Deterministic order: descending real part.
    REQUIRE(std::abs(adm.a[0] - Cx(2, 0)) < 1e-10);
    REQUIRE(std::abs(adm.a[1] - Cx(1, 0)) < 1e-10);
    REQUIRE(adm.a[2] == Cx(0, 0));
    REQUIRE(adm.worst() < 1e-10);
  }

  SECTION("generic parameters keep the frame invariants") {
    for (const Cx& b : {Cx(0, 1), Cx(1, 1), Cx(-0.7, 0.4), Cx(1, 0)}) {
      CAPTURE(b.real(), b.imag());
      Engine e(diag_family(Cx(1, 0), b));
      AdmissibleFrameData adm = btp::admissible_frame(e);
      REQUIRE(adm.worst() < 1e-10);
      REQUIRE(adm.lambda == Catch::Approx(std::abs(Cx(1, 0) + b)).margin(1e-12));
      // The eigenvalue multiset is {phase * conj(a), phase * conj(b)} with
      // phase = (a+b)/|a+b|.
      const Cx phase = (Cx(1, 0) + b) / std::abs(Cx(1, 0) + b);
      const Cx e1 = phase * Cx(1, 0);
      const Cx e2 = phase * std::conj(b);
      const double direct =
          std::min(std::abs(adm.a[0] - e1) + std::abs(adm.a[1] - e2),
                   std::abs(adm.a[0] - e2) + std::abs(adm.a[1] - e1));
      REQUIRE(direct < 1e-10);
    }
  }

  SECTION("vaisman point has equal eigenvalues") {
    Engine e(diag_family(Cx(1, 0), Cx(1, 0)));
    AdmissibleFrameData adm = btp::admissible_frame(e);
    REQUIRE(std::abs(adm.a[0] - Cx(1, 0)) < 1e-10);
    REQUIRE(std::abs(adm.a[1] - Cx(1, 0)) < 1e-10);
    REQUIRE(btp::vaisman_eigenvalue_residual(adm) < 1e-10);
  }

  SECTION("restricted holonomy block and holomorphic dual field") {
    for (const Cx& b : {Cx(2, 0), Cx(0, 1), Cx(1, 1)}) {
      Engine e(diag_family(Cx(1, 0), b));
      AdmissibleFrameData adm = btp::admissible_frame(e);
      Engine rot(adm.rotated);
      const int n = rot.n();
      double block = 0;
      for (int i = 0; i < n; ++i)
        for (int d = 0; d < 2 * n; ++d) {
          if (i < n - 1) block += std::norm(rot.bismut().eval(i, n - 1, d));
          block += std::norm(rot.bismut().eval(n - 1, i, d));
        }
      REQUIRE(std::sqrt(block) < 1e-10);
      REQUIRE(btp::chi_holomorphy_residual(rot) < 1e-10);
      REQUIRE(btp::chi_holomorphy_residual(e) < 1e-10);
    }
  }

  SECTION("balanced and non parallel inputs are rejected") {
    REQUIRE_THROWS_MATCHES(btp::admissible_frame(Engine(n3_structure())), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& err) {
                             return err.code() == ErrorCode::Balanced;
                           }));
    Engine bad(random_2step(77, 3, 2));
    REQUIRE(btp::is_btp_direct(bad).verdict == Verdict::False);
    REQUIRE_THROWS_MATCHES(btp::admissible_frame(bad), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& err) {
                             return err.code() == ErrorCode::NotBTP;
                           }));
  }
}

TEST_CASE("vaisman routes agree on non balanced parallel torsion structures") {
  for (const Cx& b : {Cx(1, 0), Cx(2, 0), Cx(0, 1), Cx(1, 1), Cx(-0.3, 0.8)}) {
    CAPTURE(b.real(), b.imag());
    Engine e(diag_family(Cx(1, 0), b));
    AdmissibleFrameData adm = btp::admissible_frame(e);
    const bool lc_route = btp::is_vaisman(e).is_true();
    const bool eigen_route = btp::vaisman_eigenvalue_residual(adm) < 1e-9;
    REQUIRE(lc_route == eigen_route);
  }
}

TEST_CASE("identity block holds on parallel torsion structures") {
  std::vector<StructureEquations> batch;
  batch.push_back(StructureEquations(3, "abelian3"));
  batch.push_back(n3_structure());
  batch.push_back(su2c_structure());
  batch.push_back(ricq5_structure());
  batch.push_back(diag_family(Cx(1, 0), Cx(2, 0)));
  batch.push_back(diag_family(Cx(2, -1), Cx(0, 0.5)));

  for (StructureEquations& S : batch) {
    S.validate();
    auto ids = btp::prop15_identities(Engine(S));
    REQUIRE(ids.size() == 16);
    for (const auto& [key, value] : ids) {
      CAPTURE(S.name(), key);
      REQUIRE(value < 1e-9);
    }
  }

  SECTION("the block refuses structures without parallel torsion") {
    REQUIRE_THROWS_MATCHES(btp::prop15_identities(Engine(random_2step(81, 3, 2))), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& err) {
                             return err.code() == ErrorCode::PreconditionFailed;
                           }));
  }
}

TEST_CASE("threefold case labels match the discriminant oracle") {
  // Independent oracle: for the diagonal family the discriminants reduce to
  // s = 2 Re(conj(a) b) and |t| = 2 |Im(conj(a) b)|, regardless of the
  // admissible-frame phase convention.
  const Cx a(1, 0);
  std::vector<Cx> bs = {Cx(0, 1),  Cx(0, -2), Cx(2, 0),   Cx(1, 0),     Cx(0.5, 0),
                        Cx(1, 1),  Cx(-1, 2), Cx(2, -.5), Cx(-0.6, -1), Cx(0, 0.3)};
  for (const Cx& b : bs) {
    CAPTURE(b.real(), b.imag());
    const double re = (std::conj(a) * b).real();
    const double im = (std::conj(a) * b).imag();
    ThreefoldCase expected;
    if (std::abs(re) < 1e-12)
      expected = ThreefoldCase::Case1;
    else if (std::abs(im) < 1e-12)
      expected = ThreefoldCase::Case3;
    else
      expected = ThreefoldCase::Case2;

    btp::ThreefoldReport rep = btp::threefold_case(diag_family(a, b));
    REQUIRE(rep.label == expected);
    REQUIRE(std::abs(rep.s - Cx(2 * re, 0)) < 1e-9);
    REQUIRE(std::abs(std::abs(rep.t) - 2 * std::abs(im)) < 1e-9);
    REQUIRE(rep.case1_matches_bkl);
  }

  SECTION("rejections and the ambiguous band") {
    REQUIRE_THROWS_MATCHES(btp::threefold_case(StructureEquations(2, "abelian2")), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& err) {
                             return err.code() == ErrorCode::NotApplicable;
                           }));
    REQUIRE_THROWS_MATCHES(btp::threefold_case(n3_structure()), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& err) {
                             return err.code() == ErrorCode::NotApplicable;
                           }));
    // Re(conj(a) b) = 3e-9 puts |s| = 6e-9 inside [tol, 10 tol).
    REQUIRE_THROWS_MATCHES(btp::threefold_case(diag_family(a, Cx(3e-9, 1))), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& err) {
                             return err.code() == ErrorCode::Indeterminate;
                           }));
    ClassificationReport r = btp::classify(diag_family(a, Cx(3e-9, 1)));
    REQUIRE(r.threefold == ThreefoldCase::Indeterminate);
  }

  SECTION("classify records the label for threefolds") {
    REQUIRE(btp::classify(diag_family(a, Cx(0, 1))).threefold == ThreefoldCase::Case1);
    REQUIRE(btp::classify(diag_family(a, Cx(2, 0))).threefold == ThreefoldCase::Case3);
    REQUIRE(btp::classify(diag_family(a, Cx(1, 1))).threefold == ThreefoldCase::Case2);
    REQUIRE(btp::classify(n3_structure()).threefold == ThreefoldCase::NotApplicable);
    REQUIRE(btp::classify(StructureEquations(4, "abelian4")).threefold ==
            ThreefoldCase::NotApplicable);
  }
}

TEST_CASE("degenerate torsion detection distinguishes block content") {
  // Non-balanced parallel-torsion threefolds always have degenerate
  // torsion; a 4-dimensional two-step structure with two independent
  // center legs does not once eta is rotated onto a single leg.
  REQUIRE(btp::has_degenerate_torsion(Engine(diag_family(Cx(1, 0), Cx(2, 0)))).is_true());
  REQUIRE(btp::has_degenerate_torsion(Engine(ricq5_structure())).is_true());

  StructureEquations mixed =
      diag_nil(2, 4, {{Cx(1, 0), Cx(1, 0)}, {Cx(1, 0), Cx(-1, 0)}}, "nil24");
  Engine e(mixed);
  REQUIRE(btp::is_btp_direct(e).is_true());
  REQUIRE_FALSE(btp::is_balanced(e).is_true());
  const FlagResult deg = btp::has_degenerate_torsion(e);
  REQUIRE(deg.verdict == Verdict::False);
  REQUIRE(deg.residual > 0.5);
}

TEST_CASE("bismut abelian certificate") {
  SECTION("diagonal connection and curvature certify directly") {
    REQUIRE(btp::bismut_abelian_certificate(Engine(StructureEquations(3, "abelian3"))).residual ==
            0.0);
    REQUIRE(btp::bismut_abelian_certificate(Engine(diag_family(Cx(1, 0), Cx(2, 0)))).is_true());
    REQUIRE(btp::bismut_abelian_certificate(Engine(n3_structure())).is_true());
  }
  SECTION("non commuting torsion blocks the certificate") {
    const FlagResult f = btp::bismut_abelian_certificate(Engine(su2c_structure()));
    REQUIRE(f.verdict == Verdict::False);
    REQUIRE(f.residual > 1.0);
  }
}

TEST_CASE("classification report bookkeeping") {
  ClassificationReport r = btp::classify(n3_structure());
  REQUIRE(r.n == 3);
  REQUIRE(r.flags.size() == 13);
  const char* expected_order[] = {"balanced", "gauduchon",  "pluriclosed",
                                  "btp_direct", "btp_thm11", "bkl",
                                  "vaisman",  "lcb",        "lck",
                                  "lp",       "gce",        "degenerate_torsion",
                                  "bismut_abelian_certificate"};
  for (std::size_t i = 0; i < r.flags.size(); ++i) REQUIRE(r.flags[i].first == expected_order[i]);

  REQUIRE(r.is("balanced"));
  REQUIRE(r.is("btp_direct"));
  REQUIRE_FALSE(r.is("pluriclosed"));
  REQUIRE_FALSE(r.is("bkl"));
  REQUIRE_FALSE(r.is("vaisman"));
  REQUIRE(r.is("lcb"));  // eta = 0 makes the Lee form trivially closed
  REQUIRE_FALSE(r.is("lck"));
  REQUIRE_FALSE(r.is("lp"));
  REQUIRE(r.flag("degenerate_torsion").residual == -1.0);
  REQUIRE(r.is("bismut_abelian_certificate"));
  REQUIRE_THROWS_AS(r.flag("nonsense"), Error);
}

TEST_CASE("corollary sweep finds no violations") {
  std::vector<StructureEquations> batch;
  batch.push_back(StructureEquations(3, "abelian3"));
  batch.push_back(n3_structure());
  batch.push_back(su2c_structure());
  batch.push_back(ricq5_structure());
  for (const Cx& b : {Cx(0, 1), Cx(1, 0), Cx(2, 0), Cx(1, 1), Cx(-1, 0)})
    batch.push_back(diag_family(Cx(1, 0), b));
  btp::CorollarySweepReport rep = btp::corollary_sweep(batch);
  REQUIRE(rep.entries.size() == batch.size());
  REQUIRE(rep.violations == 0);
  REQUIRE(rep.all_consistent);
}

TEST_CASE("classification is stable under unitary frame changes") {
  std::mt19937_64 rng(4242);
  std::vector<StructureEquations> cases;
  cases.push_back(diag_family(Cx(1, 0), Cx(2, 0)));
  cases.push_back(diag_family(Cx(1, 0), Cx(0, 1)));
  cases.push_back(su2c_structure());
  cases.push_back(ricq5_structure());

  for (StructureEquations& S : cases) {
    S.validate();
    const ClassificationReport base = btp::classify(S);
    for (int trial = 0; trial < 3; ++trial) {
      const int n = S.n();
      Eigen::MatrixXcd G(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = Cx(rand_cx(rng));
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(G);
      Eigen::MatrixXcd Qm = qr.householderQ();
      std::vector<Cx> entries(static_cast<std::size_t>(n) * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) entries[static_cast<std::size_t>(i) * n + j] = Qm(i, j);
      const btp::UnitaryMatrix U = btp::UnitaryMatrix::from_entries(n, std::move(entries));
      StructureEquations rotated = btp::change_frame(S, U);
      const ClassificationReport moved = btp::classify(rotated);
      CAPTURE(S.name(), trial);
      REQUIRE(flags_match(base, moved, 1e-10));
      REQUIRE(base.threefold == moved.threefold);
    }
  }
}
