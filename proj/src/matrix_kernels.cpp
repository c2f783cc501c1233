#include "wpsn/matrix_kernels.hpp"

#include <algorithm>
#include <cmath>

#include "wpsn/errors.hpp"

namespace wpsn::linalg {

namespace {

constexpr double kNegativeClip = 1e-8;
constexpr double kSingularRatio = 1e-14;

CMatrix symmetrized(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

template <class F>
HermitianMatrix spectral_map(const EigenSystem& es, F f) {
  const Eigen::Index n = es.values.size();
  RVector mapped(n);
  for (Eigen::Index i = 0; i < n; ++i) mapped(i) = f(es.values(i));
  CMatrix out = es.vectors * mapped.asDiagonal() * es.vectors.adjoint();
  return HermitianMatrix(symmetrized(out));
}

void check_psd(const EigenSystem& es) {
  if (es.values.size() == 0) return;
  const double top = std::max(es.values(0), 0.0);
  const double bottom = es.values(es.values.size() - 1);
  if (bottom < -kNegativeClip * top || (top == 0.0 && bottom < 0.0)) throw NotPsd(bottom);
}

}  // namespace

HermitianMatrix::HermitianMatrix(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DomainError("Hermitian matrix must be square");
  const double norm = m.norm();
  if (norm > 0.0) {
    const double resid = (m - m.adjoint()).norm() / norm;
    if (!(resid <= kHermitianRejectTol)) throw NotHermitian(resid);
  }
  m_ = symmetrized(m);
}

HermitianMatrix HermitianMatrix::zeros(Eigen::Index n) { return HermitianMatrix(CMatrix::Zero(n, n)); }

HermitianMatrix HermitianMatrix::identity(Eigen::Index n) {
  return HermitianMatrix(CMatrix::Identity(n, n));
}

HermitianMatrix HermitianMatrix::outer(const CVector& v, double scale) {
  return HermitianMatrix(scale * (v * v.adjoint()));
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& d) {
  return HermitianMatrix(CMatrix(d.cast<Complex>().asDiagonal()));
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  return HermitianMatrix(m_ + o.m_);
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  return HermitianMatrix(m_ - o.m_);
}

HermitianMatrix HermitianMatrix::operator*(double s) const { return HermitianMatrix(m_ * s); }

double relative_frobenius(const CMatrix& a, const CMatrix& b) {
  const double scale = b.norm();
  const double diff = (a - b).norm();
  return scale > 0.0 ? diff / scale : diff;
}

Complex normalize_phase(Eigen::Ref<CVector> v) {
  if (v.size() == 0) return 1.0;
  const double peak = v.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > 1e-10 * peak) {
      const Complex c = std::conj(v(i)) / mag;
      v *= c;
      v(i) = Complex(std::abs(v(i)), 0.0);
      return c;
    }
  }
  return 1.0;
}

EigenSystem hermitian_eig(const HermitianMatrix& a) {
  EigenSystem out;
  const Eigen::Index n = a.size();
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix());
  if (es.info() != Eigen::Success) throw NotConverged("Hermitian eigensolver", 0.0);
  // Eigen returns ascending order; reversing keeps ties in a fixed, input-determined order.
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < n; ++j) normalize_phase(out.vectors.col(j));
  return out;
}

RVector hermitian_eigenvalues(const HermitianMatrix& a) {
  if (a.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

SvdFactors svd(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> js(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdFactors f{js.matrixU(), js.singularValues(), js.matrixV()};
  const Eigen::Index r = f.singulars.size();
  for (Eigen::Index j = 0; j < f.right.cols(); ++j) {
    const Complex c = normalize_phase(f.right.col(j));
    // the same unit phase on the paired left vector keeps U S V^H unchanged
    if (j < r) f.left.col(j) *= c;
  }
  for (Eigen::Index j = r; j < f.left.cols(); ++j) normalize_phase(f.left.col(j));
  return f;
}

HermitianMatrix psd_sqrt(const HermitianMatrix& a) {
  const EigenSystem es = hermitian_eig(a);
  check_psd(es);
  return spectral_map(es, [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

HermitianMatrix psd_inverse(const HermitianMatrix& a) {
  const EigenSystem es = hermitian_eig(a);
  const Eigen::Index n = es.values.size();
  if (n == 0) return a;
  if (!(es.values(n - 1) > kSingularRatio * es.values(0))) throw Singular("matrix is singular or indefinite");
  return spectral_map(es, [](double x) { return 1.0 / x; });
}

HermitianMatrix psd_inverse_sqrt(const HermitianMatrix& a) {
  const EigenSystem es = hermitian_eig(a);
  const Eigen::Index n = es.values.size();
  if (n == 0) return a;
  if (!(es.values(n - 1) > kSingularRatio * es.values(0))) throw Singular("matrix is singular or indefinite");
  return spectral_map(es, [](double x) { return 1.0 / std::sqrt(x); });
}

double log2_det_spd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) throw Singular("Cholesky factorization failed");
  double s = 0.0;
  const CMatrix& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log2(l(i, i).real());
  return 2.0 * s;
}

}  // namespace wpsn::linalg
