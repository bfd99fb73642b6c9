#include <doctest.h>

#include <cmath>

#include "bear/errors.hpp"
#include "bear/matrix.hpp"
#include "oracles.hpp"

using bear::index_t;
using bear::Matrix;

TEST_CASE("l1_norm basics") {
  CHECK(bear::l1_norm(Matrix::of({{1, -2}, {0, 3}})) == doctest::Approx(6.0));
  CHECK(bear::l1_norm(Matrix(5, 5)) == 0.0);
  CHECK(bear::l1_norm(Matrix()) == 0.0);  // empty -> 0 by convention
}

TEST_CASE("fro_norm basics") {
  CHECK(bear::fro_norm(Matrix::of({{3, 0}, {0, 4}})) == doctest::Approx(5.0));
  Matrix eye(4, 4);
  for (index_t i = 0; i < 4; ++i) eye(i, i) = 1.0f;
  CHECK(bear::fro_norm(eye) == doctest::Approx(2.0));
}

TEST_CASE("norms match the entrywise oracle on seeded input") {
  const Matrix m = oracles::random_matrix(10, 10, 42);
  CHECK(bear::l1_norm(m) == doctest::Approx(oracles::naive_l1(m)).epsilon(1e-9));
  CHECK(bear::fro_norm(m) == doctest::Approx(oracles::naive_fro(m)).epsilon(1e-9));
}

TEST_CASE("norm properties: homogeneity and the l1 >= fro >= sigma1 chain") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const Matrix m = oracles::random_matrix(12, 7, seed);
    const double alpha = -2.375;
    Matrix scaled = m;
    for (index_t i = 0; i < scaled.size(); ++i)
      scaled.data()[i] = static_cast<float>(alpha * scaled.data()[i]);
    CHECK(bear::l1_norm(scaled) ==
          doctest::Approx(std::abs(alpha) * bear::l1_norm(m)).epsilon(1e-6));
    CHECK(bear::fro_norm(scaled) ==
          doctest::Approx(std::abs(alpha) * bear::fro_norm(m)).epsilon(1e-6));

    const auto svd = bear::svd_small(m);
    CHECK(bear::l1_norm(m) >= bear::fro_norm(m));
    CHECK(bear::fro_norm(m) >= svd.singular_values[0] - 1e-9);
    CHECK(svd.singular_values[0] >= 0.0);
  }
}

TEST_CASE("relative_error trivial identities and errors") {
  const Matrix l = oracles::random_matrix(6, 5, 7);
  CHECK(bear::relative_error(l, l) == 0.0);
  CHECK(bear::relative_error(l, Matrix(6, 5)) == doctest::Approx(1.0));
  Matrix twice = l;
  for (index_t i = 0; i < twice.size(); ++i) twice.data()[i] *= 2.0f;
  CHECK(bear::relative_error(l, twice) == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(bear::relative_error(l, Matrix(5, 6)), bear::DimensionError);
  CHECK_THROWS_AS(bear::relative_error(Matrix(3, 3), Matrix(3, 3)),
                  bear::DegenerateInputError);
}

TEST_CASE("relative_error depends only on the difference") {
  const Matrix a = oracles::random_matrix(8, 8, 11);
  const Matrix d = oracles::random_matrix(8, 8, 13, 0.1);
  Matrix b = a;
  for (index_t i = 0; i < b.size(); ++i) b.data()[i] += d.data()[i];
  CHECK(bear::relative_error(a, b) ==
        doctest::Approx(oracles::naive_fro(d) / oracles::naive_fro(a)).epsilon(1e-5));
}

namespace {

void check_svd_contract(const Matrix& m, double tol = 1e-5) {
  const auto svd = bear::svd_small(m);
  const index_t n = m.rows(), k = std::min(m.rows(), m.cols());

  for (std::size_t i = 0; i + 1 < svd.singular_values.size(); ++i)
    CHECK(svd.singular_values[i] >= svd.singular_values[i + 1]);
  for (double s : svd.singular_values) CHECK(s >= 0.0);

  // reconstruction
  Matrix recon(m.rows(), m.cols());
  for (index_t j = 0; j < m.cols(); ++j)
    for (index_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (index_t t = 0; t < k; ++t)
        acc += static_cast<double>(svd.u(i, t)) *
               svd.singular_values[static_cast<std::size_t>(t)] * svd.v(j, t);
      recon(i, j) = static_cast<float>(acc);
    }
  const double ref = bear::fro_norm(m);
  if (ref > 0.0) CHECK(bear::relative_error(m, recon) <= tol);

  // orthonormality, entrywise
  for (index_t a = 0; a < k; ++a)
    for (index_t b = 0; b < k; ++b) {
      double uu = 0.0, vv = 0.0;
      for (index_t i = 0; i < n; ++i)
        uu += static_cast<double>(svd.u(i, a)) * svd.u(i, b);
      for (index_t i = 0; i < m.cols(); ++i)
        vv += static_cast<double>(svd.v(i, a)) * svd.v(i, b);
      const double want = a == b ? 1.0 : 0.0;
      CHECK(std::abs(uu - want) <= 1e-5);
      CHECK(std::abs(vv - want) <= 1e-5);
    }
}

}  // namespace

TEST_CASE("svd_small on diag(3, 1)") {
  const Matrix m = Matrix::of({{3, 0}, {0, 1}});
  const auto svd = bear::svd_small(m);
  CHECK(svd.singular_values[0] == doctest::Approx(3.0));
  CHECK(svd.singular_values[1] == doctest::Approx(1.0));
  check_svd_contract(m, 1e-6);
}

TEST_CASE("svd_small on a rank-1 outer product has sigma = (1, 0)") {
  const index_t n = 6;
  Matrix m(n, n);
  std::vector<double> u(n), v(n);
  bear::Rng rng(99);
  double nu = 0.0, nv = 0.0;
  for (index_t i = 0; i < n; ++i) {
    u[i] = rng.normal();
    v[i] = rng.normal();
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  for (index_t i = 0; i < n; ++i) {
    u[i] /= std::sqrt(nu);
    v[i] /= std::sqrt(nv);
  }
  for (index_t j = 0; j < n; ++j)
    for (index_t i = 0; i < n; ++i) m(i, j) = static_cast<float>(u[i] * v[j]);

  const auto svd = bear::svd_small(m);
  CHECK(svd.singular_values[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(svd.singular_values[1] <= 1e-5);
  check_svd_contract(m);
}

TEST_CASE("svd_small matches the Gram-matrix eigenvalue oracle") {
  const Matrix m = oracles::random_matrix(20, 8, 31);
  check_svd_contract(m);
  const auto svd = bear::svd_small(m);
  const auto gram = oracles::gram_singular_values(m);
  for (std::size_t i = 0; i < gram.size(); ++i)
    CHECK(svd.singular_values[i] ==
          doctest::Approx(gram[i]).epsilon(1e-6).scale(gram[0]));
}

TEST_CASE("svd_small handles wide matrices and the zero matrix") {
  check_svd_contract(oracles::random_matrix(5, 17, 8));
  check_svd_contract(Matrix(4, 3), 0.0);  // all-zero: completion keeps U, V orthonormal
}

TEST_CASE("svd_small singular values are invariant under column permutation") {
  const Matrix m = oracles::random_matrix(12, 6, 17);
  Matrix perm(12, 6);
  const index_t order[6] = {3, 0, 5, 1, 4, 2};
  for (index_t j = 0; j < 6; ++j)
    for (index_t i = 0; i < 12; ++i) perm(i, j) = m(i, order[j]);
  const auto a = bear::svd_small(m);
  const auto b = bear::svd_small(perm);
  for (std::size_t i = 0; i < a.singular_values.size(); ++i)
    CHECK(a.singular_values[i] ==
          doctest::Approx(b.singular_values[i]).epsilon(1e-8).scale(
              a.singular_values[0] + 1e-30));
}

TEST_CASE("svd_small rejects over-cap input") {
  CHECK_THROWS_AS(bear::svd_small(Matrix(3, 3), /*cap=*/2), bear::SizeError);
}

TEST_CASE("nuclear_norm") {
  CHECK(bear::nuclear_norm(Matrix::of({{3, 0}, {0, 1}})) == doctest::Approx(4.0));
  CHECK(bear::nuclear_norm(Matrix(4, 4)) == doctest::Approx(0.0));

  // random rank-2 30x30: nuclear norm equals the two nonzero Gram sigmas
  const Matrix a = oracles::random_matrix(30, 2, 5);
  const Matrix b = oracles::random_matrix(30, 2, 6);
  Matrix m(30, 30);
  for (index_t j = 0; j < 30; ++j)
    for (index_t i = 0; i < 30; ++i) {
      double acc = 0.0;
      for (index_t t = 0; t < 2; ++t)
        acc += static_cast<double>(a(i, t)) * b(j, t);
      m(i, j) = static_cast<float>(acc);
    }
  const auto gram = oracles::gram_singular_values(m);
  CHECK(bear::nuclear_norm(m) ==
        doctest::Approx(gram[0] + gram[1]).epsilon(1e-6));
}

TEST_CASE("allclose uses atol + rtol * |b|") {
  Matrix a = Matrix::of({{1.0f, 2.0f}});
  Matrix b = Matrix::of({{1.0f + 5e-7f, 2.0f}});
  CHECK(bear::allclose(a, b));
  Matrix c = Matrix::of({{1.1f, 2.0f}});
  CHECK_FALSE(bear::allclose(a, c));
  CHECK_FALSE(bear::allclose(a, Matrix(2, 1)));
}
