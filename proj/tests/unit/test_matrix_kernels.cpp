#include <doctest.h>

#include <cstring>
#include <random>

#include "wpsn/errors.hpp"
#include "wpsn/matrix_kernels.hpp"

using namespace wpsn;
using namespace wpsn::linalg;

namespace {

CMatrix random_complex(std::mt19937_64& eng, int rows, int cols) {
  std::normal_distribution<double> nd;
  CMatrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = {nd(eng), nd(eng)};
  return a;
}

HermitianMatrix random_hermitian(std::mt19937_64& eng, int n) {
  const CMatrix a = random_complex(eng, n, n);
  return HermitianMatrix(0.5 * (a + a.adjoint()));
}

HermitianMatrix random_pd(std::mt19937_64& eng, int n, double ridge = 0.5) {
  const CMatrix a = random_complex(eng, n, n);
  return HermitianMatrix(a * a.adjoint() + ridge * CMatrix::Identity(n, n));
}

}  // namespace

TEST_CASE("hermitian matrices reject clearly asymmetric input and symmetrize rounding noise") {
  CMatrix a = CMatrix::Identity(2, 2);
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianMatrix{a}, NotHermitian);
  CMatrix b = CMatrix::Identity(2, 2);
  b(0, 1) = Complex(0.5, 1e-14);
  b(1, 0) = 0.5;
  const HermitianMatrix h(b);
  CHECK(h.matrix() == h.matrix().adjoint());
}

TEST_CASE("eigenvalues of identity and diagonal matrices") {
  const RVector one = hermitian_eigenvalues(HermitianMatrix::identity(3));
  for (int i = 0; i < 3; ++i) CHECK(one(i) == doctest::Approx(1.0).epsilon(1e-14));
  const RVector d = hermitian_eig(HermitianMatrix::diagonal(RVector{{2.0, 5.0, 1.0}})).values;
  CHECK(d(0) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(d(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(d(2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eigen-decomposition reconstructs random Hermitian input") {
  std::mt19937_64 eng(1);
  for (int n : {1, 2, 4, 6}) {
    const HermitianMatrix a = random_hermitian(eng, n);
    const EigenSystem es = hermitian_eig(a);
    const CMatrix back = es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
    CHECK(relative_frobenius(back, a.matrix()) < 1e-10);
    for (int j = 0; j + 1 < n; ++j) CHECK(es.values(j) >= es.values(j + 1));
    for (int j = 0; j < n; ++j) {
      CHECK(es.vectors.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
      // first non-negligible entry is real and nonnegative
      int first = 0;
      while (std::abs(es.vectors(first, j)) < 1e-12) ++first;
      CHECK(es.vectors(first, j).real() >= 0.0);
      CHECK(std::abs(es.vectors(first, j).imag()) < 1e-14);
    }
  }
}

TEST_CASE("eigen-decomposition is bitwise deterministic") {
  std::mt19937_64 eng(2);
  const HermitianMatrix a = random_hermitian(eng, 5);
  const EigenSystem x = hermitian_eig(a);
  const EigenSystem y = hermitian_eig(a);
  CHECK(std::memcmp(x.values.data(), y.values.data(), sizeof(double) * x.values.size()) == 0);
  CHECK(std::memcmp(x.vectors.data(), y.vectors.data(), sizeof(Complex) * x.vectors.size()) == 0);
}

TEST_CASE("svd of zero, rank-one and random matrices") {
  const SvdFactors z = svd(CMatrix::Zero(3, 2));
  CHECK(z.singulars.size() == 2);
  CHECK(z.singulars.cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 eng(4);
  CVector a = random_complex(eng, 4, 1);
  CVector b = random_complex(eng, 3, 1);
  a.normalize();
  b.normalize();
  const SvdFactors r1 = svd(a * b.adjoint());
  CHECK(r1.singulars(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r1.singulars(1)) < 1e-12);
  CHECK(std::abs(r1.singulars(2)) < 1e-12);

  const CMatrix m = random_complex(eng, 4, 3);
  const SvdFactors f = svd(m);
  const RVector ev = hermitian_eigenvalues(HermitianMatrix(m.adjoint() * m));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(f.singulars(i) - std::sqrt(ev(i))) < 1e-9);
  const CMatrix back = f.left * f.singulars.asDiagonal() * f.right.adjoint();
  CHECK(relative_frobenius(back, m) < 1e-10);
}

TEST_CASE("psd square root") {
  CHECK(relative_frobenius(psd_sqrt(HermitianMatrix::identity(3)).matrix(), CMatrix::Identity(3, 3)) < 1e-14);
  const CMatrix r = psd_sqrt(HermitianMatrix::diagonal(RVector{{4.0, 9.0}})).matrix();
  CHECK(std::abs(r(0, 0) - 2.0) < 1e-13);
  CHECK(std::abs(r(1, 1) - 3.0) < 1e-13);
  std::mt19937_64 eng(5);
  const HermitianMatrix a = random_pd(eng, 4, 0.0);
  const CMatrix s = psd_sqrt(a).matrix();
  CHECK(relative_frobenius(s * s, a.matrix()) < 1e-9);
}

TEST_CASE("psd inverse and inverse square root") {
  CHECK(relative_frobenius(psd_inverse(HermitianMatrix::identity(2)).matrix(), CMatrix::Identity(2, 2)) < 1e-14);
  const CMatrix d = psd_inverse(HermitianMatrix::diagonal(RVector{{2.0, 4.0}})).matrix();
  CHECK(std::abs(d(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(d(1, 1) - 0.25) < 1e-14);
  std::mt19937_64 eng(6);
  const HermitianMatrix a = random_pd(eng, 5);
  CHECK(relative_frobenius(psd_inverse(a).matrix() * a.matrix(), CMatrix::Identity(5, 5)) < 1e-9);
  const CMatrix is = psd_inverse_sqrt(a).matrix();
  CHECK(relative_frobenius(is * a.matrix() * is, CMatrix::Identity(5, 5)) < 1e-9);
}

TEST_CASE("log2 det via Cholesky") {
  CHECK(log2_det_spd(HermitianMatrix::diagonal(RVector{{2.0, 4.0}}).matrix()) == doctest::Approx(3.0).epsilon(1e-14));
  std::mt19937_64 eng(8);
  const HermitianMatrix a = random_pd(eng, 4);
  const double expected = hermitian_eigenvalues(a).array().log2().sum();
  CHECK(log2_det_spd(a.matrix()) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(log2_det_spd(HermitianMatrix::diagonal(RVector{{1.0, -1.0}}).matrix()), Singular);
}
