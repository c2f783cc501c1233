#pragma once

#include <complex>

#include <Eigen/Dense>

namespace wpsn::linalg {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Symmetry tolerance past which construction is rejected.
inline constexpr double kHermitianRejectTol = 1e-9;

/// Square complex matrix that is Hermitian by construction.
/// Inputs within kHermitianRejectTol are symmetrized; anything worse throws NotHermitian.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& m);

  static HermitianMatrix zeros(Eigen::Index n);
  static HermitianMatrix identity(Eigen::Index n);
  // scale * v v^H
  static HermitianMatrix outer(const CVector& v, double scale = 1.0);
  static HermitianMatrix diagonal(const RVector& d);

  const CMatrix& matrix() const noexcept { return m_; }
  Eigen::Index size() const noexcept { return m_.rows(); }
  double trace() const { return m_.trace().real(); }

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;

 private:
  CMatrix m_;
};

struct EigenSystem {
  RVector values;   // descending
  CMatrix vectors;  // column j pairs with values(j)
};

struct SvdFactors {
  CMatrix left;
  RVector singulars;  // descending, length min(rows, cols)
  CMatrix right;
};

double relative_frobenius(const CMatrix& a, const CMatrix& b);

// Scale v so its first entry of non-negligible magnitude is real and nonnegative.
// Returns the unit factor that was applied.
Complex normalize_phase(Eigen::Ref<CVector> v);

EigenSystem hermitian_eig(const HermitianMatrix& a);
RVector hermitian_eigenvalues(const HermitianMatrix& a);
SvdFactors svd(const CMatrix& a);

HermitianMatrix psd_sqrt(const HermitianMatrix& a);
HermitianMatrix psd_inverse(const HermitianMatrix& a);
HermitianMatrix psd_inverse_sqrt(const HermitianMatrix& a);

// log2 det of a positive definite matrix via Cholesky. Throws Singular if the factorization fails.
double log2_det_spd(const CMatrix& a);

}  // namespace wpsn::linalg
