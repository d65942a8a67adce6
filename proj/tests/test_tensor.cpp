#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "btp/tensor.hpp"

using btp::Axis;
using btp::Cx;
using btp::Tensor;
using btp::UnitaryMatrix;

namespace {

double uniform01(std::mt19937_64& rng) { return std::ldexp(static_cast<double>(rng() >> 11), -53); }
Cx rand_cx(std::mt19937_64& rng) {
  return Cx(2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0);
}

// Test-side oracle: random unitary built by plain Gram-Schmidt on a random
// complex matrix, independent of the library's eigensolver path.
std::vector<Cx> gs_unitary(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Cx>> cols(n, std::vector<Cx>(n));
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) cols[c][r] = rand_cx(rng);
  for (int c = 0; c < n; ++c) {
    for (int p = 0; p < c; ++p) {
      Cx proj(0, 0);
      for (int r = 0; r < n; ++r) proj += std::conj(cols[p][r]) * cols[c][r];
      for (int r = 0; r < n; ++r) cols[c][r] -= proj * cols[p][r];
    }
    double nv = 0;
    for (int r = 0; r < n; ++r) nv += std::norm(cols[c][r]);
    nv = std::sqrt(nv);
    for (int r = 0; r < n; ++r) cols[c][r] /= nv;
  }
  std::vector<Cx> rowmajor(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) rowmajor[static_cast<std::size_t>(r) * n + c] = cols[c][r];
  return rowmajor;
}

std::vector<Cx> matmul(const std::vector<Cx>& a, const std::vector<Cx>& b, int n) {
  std::vector<Cx> out(static_cast<std::size_t>(n) * n, Cx(0, 0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(i) * n + j] +=
            a[static_cast<std::size_t>(i) * n + k] * b[static_cast<std::size_t>(k) * n + j];
  return out;
}

std::vector<Cx> adjoint_of(const std::vector<Cx>& a, int n) {
  std::vector<Cx> out(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i) * n + j] = std::conj(a[static_cast<std::size_t>(j) * n + i]);
  return out;
}

}  // namespace

TEST_CASE("tensor indexing and norms") {
  Tensor t({2, 3}, {Axis::Upper, Axis::Lower});
  t(0, 0) = Cx(1, 0);
  t(1, 2) = Cx(0, -2);
  CHECK(t(0, 0) == Cx(1, 0));
  CHECK(t(1, 2) == Cx(0, -2));
  CHECK(t(0, 1) == Cx(0, 0));
  CHECK(t.max_abs() == Catch::Approx(2.0));
  CHECK(t.frobenius() == Catch::Approx(std::sqrt(5.0)));
}

TEST_CASE("declare_antisymmetric accepts and enforces") {
  Tensor t({2, 3, 3}, {Axis::Upper, Axis::Lower, Axis::Lower});
  t(0, 0, 1) = Cx(1, 1);
  t(0, 1, 0) = Cx(-1, -1);
  t(1, 1, 2) = Cx(0, 3);
  t(1, 2, 1) = Cx(0, -3);
  t.declare_antisymmetric(1, 2);
  CHECK(t(0, 0, 1) == Cx(1, 1));
  CHECK(t(0, 1, 0) == Cx(-1, -1));
  CHECK(t(1, 1, 1) == Cx(0, 0));

  Tensor bad({2, 2}, {Axis::Lower, Axis::Lower});
  bad(0, 1) = Cx(1, 0);
  bad(1, 0) = Cx(1, 0);
  CHECK_THROWS_AS(bad.declare_antisymmetric(0, 1), btp::Error);
}

TEST_CASE("unitary matrix validation") {
  auto u = UnitaryMatrix::identity(3);
  CHECK(u(0, 0) == Cx(1, 0));
  CHECK(u(0, 1) == Cx(0, 0));

  auto g = UnitaryMatrix::from_entries(2, gs_unitary(2, 7));
  auto ga = g.adjoint();
  auto prod = g.multiply(ga);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(prod(i, j) - (i == j ? Cx(1, 0) : Cx(0, 0))) < 1e-12);

  std::vector<Cx> notu = {Cx(1, 0), Cx(1, 0), Cx(0, 0), Cx(1, 0)};
  CHECK_THROWS_AS(UnitaryMatrix::from_entries(2, notu), btp::Error);
}

TEST_CASE("change_frame is functorial and norm preserving") {
  std::mt19937_64 rng(11);
  const int n = 3;
  Tensor t({n, n, n}, {Axis::Upper, Axis::Lower, Axis::LowerBar});
  for (Cx& c : t.data()) c = rand_cx(rng);
  const double norm0 = t.frobenius();

  auto u = UnitaryMatrix::from_entries(n, gs_unitary(n, 21));
  auto v = UnitaryMatrix::from_entries(n, gs_unitary(n, 22));

  Tensor step = btp::change_frame(btp::change_frame(t, u), v);
  Tensor comp = btp::change_frame(t, v.multiply(u));
  CHECK(btp::tensor_diff(step, comp) < 1e-11);
  CHECK(std::abs(step.frobenius() - norm0) < 1e-11);

  // Independent brute-force invariance check: |T|^2 as an explicit triple
  // sum in both frames.
  auto brute = [&](const Tensor& x) {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) s += std::norm(x(i, j, k));
    return s;
  };
  CHECK(std::abs(brute(t) - brute(btp::change_frame(t, u))) < 1e-10);

  Tensor dir({n, 2 * n}, {Axis::Upper, Axis::Direction});
  CHECK_THROWS_AS(btp::change_frame(dir, u), btp::Error);
}

TEST_CASE("diagonalize identity and zero") {
  std::vector<Cx> id = {Cx(1, 0), Cx(0, 0), Cx(0, 0), Cx(1, 0)};
  auto [u, d] = btp::unitary_diagonalize_normal(id, 2);
  CHECK(std::abs(d[0] - Cx(1, 0)) < 1e-12);
  CHECK(std::abs(d[1] - Cx(1, 0)) < 1e-12);

  std::vector<Cx> z(4, Cx(0, 0));
  auto [uz, dz] = btp::unitary_diagonalize_normal(z, 2);
  CHECK(std::abs(dz[0]) < 1e-12);
  CHECK(std::abs(dz[1]) < 1e-12);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Cx s(0, 0);
      for (int k = 0; k < 2; ++k) s += uz(i, k) * std::conj(uz(j, k));
      CHECK(std::abs(s - (i == j ? Cx(1, 0) : Cx(0, 0))) < 1e-12);
    }
}

TEST_CASE("diagonalize recovers constructed spectrum") {
  // Oracle: build M = W diag(2i, -i, 0) W* from a seeded Gram-Schmidt
  // unitary, then require the library to recover the sorted eigenvalues
  // (sort is by Re desc then Im desc: 0, 2i, -i have Re 0,0,0 -> by Im:
  // 2i, 0, -i).
  const int n = 3;
  auto w = gs_unitary(n, 33);
  std::vector<Cx> diag(static_cast<std::size_t>(n) * n, Cx(0, 0));
  diag[0] = Cx(0, 2);
  diag[4] = Cx(0, -1);
  diag[8] = Cx(0, 0);
  auto M = matmul(matmul(w, diag, n), adjoint_of(w, n), n);

  auto [u, d] = btp::unitary_diagonalize_normal(M, n);
  CHECK(std::abs(d[0] - Cx(0, 2)) < 1e-9);
  CHECK(std::abs(d[1] - Cx(0, 0)) < 1e-9);
  CHECK(std::abs(d[2] - Cx(0, -1)) < 1e-9);

  // Reassembly U diag(d) U* == M, relative Frobenius.
  std::vector<Cx> uv(static_cast<std::size_t>(n) * n), dd(static_cast<std::size_t>(n) * n, Cx(0, 0));
  for (int i = 0; i < n; ++i) {
    dd[static_cast<std::size_t>(i) * n + i] = d[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) uv[static_cast<std::size_t>(i) * n + j] = u(i, j);
  }
  auto back = matmul(matmul(uv, dd, n), adjoint_of(uv, n), n);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < back.size(); ++i) {
    num += std::norm(back[i] - M[i]);
    den += std::norm(M[i]);
  }
  CHECK(std::sqrt(num / den) < 1e-9);
}

TEST_CASE("diagonalize handles repeated eigenvalues deterministically") {
  const int n = 3;
  auto w = gs_unitary(n, 55);
  std::vector<Cx> diag(static_cast<std::size_t>(n) * n, Cx(0, 0));
  diag[0] = Cx(1, 0);
  diag[4] = Cx(1, 0);
  diag[8] = Cx(-2, 0);
  auto M = matmul(matmul(w, diag, n), adjoint_of(w, n), n);

  auto [u, d] = btp::unitary_diagonalize_normal(M, n);
  CHECK(std::abs(d[0] - Cx(1, 0)) < 1e-9);
  CHECK(std::abs(d[1] - Cx(1, 0)) < 1e-9);
  CHECK(std::abs(d[2] - Cx(-2, 0)) < 1e-9);

  auto [u2, d2] = btp::unitary_diagonalize_normal(M, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(u(i, j) == u2(i, j));
}

TEST_CASE("diagonalize rejects non-normal input") {
  std::vector<Cx> nil = {Cx(0, 0), Cx(1, 0), Cx(0, 0), Cx(0, 0)};
  try {
    btp::unitary_diagonalize_normal(nil, 2);
    FAIL("expected NotNormal");
  } catch (const btp::Error& e) {
    CHECK(e.code() == btp::ErrorCode::NotNormal);
  }
}
