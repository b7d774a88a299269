#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "qsfunm/errors.hpp"

namespace qsfunm {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using DenseMatrix = Matrix<Complex>;
using DenseVector = Vector<Complex>;
using RealVector = Eigen::VectorXd;

inline constexpr double kUnitRoundoff = 2.22e-16;

template <typename Scalar>
struct QrResult {
  Matrix<Scalar> q;  // unitary, m x m
  Matrix<Scalar> r;  // upper trapezoidal, m x n
};

/// Reduced SVD restricted to the retained triplets; the represented matrix
/// is left * diag(singular) * right^*.
template <typename Scalar>
struct SvdResult {
  Matrix<Scalar> left;
  RealVector singular;
  Matrix<Scalar> right;

  Index rank() const { return singular.size(); }
  Matrix<Scalar> reconstruct() const {
    return left * singular.asDiagonal() * right.adjoint();
  }
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": matrix has non-finite entries");
  }
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(what) + ": matrix must be square, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.norm();
  return (a - a.adjoint()).norm() <= 1e-14 * scale;
}

}  // namespace detail

template <typename Derived>
QrResult<typename Derived::Scalar> householder_qr(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) throw InvalidArgument("householder_qr: empty matrix");
  detail::require_finite(m, "householder_qr");
  Eigen::HouseholderQR<Matrix<Scalar>> qr(m.derived());
  QrResult<Scalar> out;
  out.q = qr.householderQ();
  out.r = qr.matrixQR().template triangularView<Eigen::Upper>();
  return out;
}

/// Thin QR: Q has min(m, n) orthonormal columns.
template <typename Derived>
QrResult<typename Derived::Scalar> thin_qr(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Matrix<Scalar>> qr(m.derived());
  QrResult<Scalar> out;
  out.q = qr.householderQ() * Matrix<Scalar>::Identity(m.rows(), k);
  out.r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  return out;
}

namespace detail {

/// Thin SVD by divide and conquer, re-done with Jacobi if the factorization
/// fails to reproduce the input (Eigen 3.4.0's BDCSVD occasionally does).
template <typename Scalar>
SvdResult<Scalar> full_svd(const Matrix<Scalar>& m) {
  constexpr int opts = Eigen::ComputeThinU | Eigen::ComputeThinV;
  {
    Eigen::BDCSVD<Matrix<Scalar>> svd(m, opts);
    SvdResult<Scalar> out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    const double scale = m.norm();
    const double dim = static_cast<double>(std::min(m.rows(), m.cols()));
    if ((out.reconstruct() - m).norm() <= 1e-13 * std::sqrt(dim) * scale) return out;
  }
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m, opts);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Keeps the leading triplets with sigma_i > threshold.
template <typename Scalar>
SvdResult<Scalar> truncate(SvdResult<Scalar> s, double threshold) {
  Index r = 0;
  while (r < s.singular.size() && s.singular(r) > threshold) ++r;
  s.left.conservativeResize(Eigen::NoChange, r);
  s.right.conservativeResize(Eigen::NoChange, r);
  s.singular.conservativeResize(r);
  return s;
}

}  // namespace detail

/// Retains exactly the triplets with sigma_i > relTol * sigma_1.
template <typename Derived>
SvdResult<typename Derived::Scalar> truncated_svd(const Eigen::MatrixBase<Derived>& m,
                                                  double relTol) {
  using Scalar = typename Derived::Scalar;
  if (!(relTol >= 0.0 && relTol < 1.0)) {
    throw InvalidArgument("truncated_svd: relTol must lie in [0, 1), got " +
                          std::to_string(relTol));
  }
  detail::require_finite(m, "truncated_svd");
  if (m.size() == 0) {
    return {Matrix<Scalar>(m.rows(), 0), RealVector(0), Matrix<Scalar>(m.cols(), 0)};
  }
  auto s = detail::full_svd<Scalar>(m.derived());
  const double top = s.singular.size() > 0 ? s.singular(0) : 0.0;
  return detail::truncate(std::move(s), relTol * top);
}

/// All min(m, n) singular values, nonincreasing, from the eigenvalues of
/// the Hermitian matrix [0 M; M^* 0] (which are +-sigma_i and zeros).
template <typename Derived>
RealVector singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) throw InvalidArgument("singular_values: empty matrix");
  detail::require_finite(m, "singular_values");
  const Index r = m.rows(), c = m.cols();
  Matrix<Scalar> h = Matrix<Scalar>::Zero(r + c, r + c);
  h.topRightCorner(r, c) = m;
  h.bottomLeftCorner(c, r) = m.adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(h, Eigen::EigenvaluesOnly);
  const Index k = std::min(r, c);
  RealVector out = es.eigenvalues().tail(k).reverse();
  return out.cwiseMax(0.0);
}

/// sigma_1 as the square root of the largest eigenvalue of the smaller
/// Gram matrix; relative accuracy is that of the eigensolver.
template <typename Derived>
double norm2(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return 0.0;
  detail::require_finite(m, "norm2");
  const Matrix<Scalar> g = m.rows() <= m.cols() ? Matrix<Scalar>(m * m.adjoint())
                                                : Matrix<Scalar>(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(g.rows() - 1)));
}

/// Eigendecomposition A = V diag(lambda) V^{-1} with unit 2-norm columns in V.
struct EigenDecomposition {
  DenseVector eigenvalues;
  DenseMatrix vectors;
  DenseMatrix inverseVectors;
  double conditionNumber = 1.0;
  bool hermitian = false;
};

inline constexpr double kNearDefectiveCond = 1e12;

/// Hermitian inputs go through the tridiagonal QL path, everything else
/// through complex Schur with back-substituted eigenvectors.
template <typename Derived>
EigenDecomposition eigen_decompose(const Eigen::MatrixBase<Derived>& a) {
  detail::require_square(a, "eigen_decompose");
  detail::require_finite(a, "eigen_decompose");
  const DenseMatrix ac = a.template cast<Complex>();
  EigenDecomposition out;
  if (detail::is_hermitian(ac)) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(ac);
    out.eigenvalues = es.eigenvalues().template cast<Complex>();
    out.vectors = es.eigenvectors();
    out.inverseVectors = out.vectors.adjoint();
    const RealVector sv = singular_values(out.vectors);
    out.conditionNumber = std::max(1.0, sv(0) / sv(sv.size() - 1));
    out.hermitian = true;
    return out;
  }
  Eigen::ComplexEigenSolver<DenseMatrix> es(ac);
  if (es.info() != Eigen::Success) {
    throw NearDefective("eigen_decompose: Schur iteration did not converge");
  }
  out.eigenvalues = es.eigenvalues();
  out.vectors = es.eigenvectors();
  for (Index j = 0; j < out.vectors.cols(); ++j) out.vectors.col(j).normalize();
  const RealVector sv = singular_values(out.vectors);
  const double smallest = sv(sv.size() - 1);
  out.conditionNumber = smallest > 0.0 ? sv(0) / smallest : INFINITY;
  if (!(out.conditionNumber <= kNearDefectiveCond)) {
    throw NearDefective("eigen_decompose: eigenvector matrix condition number " +
                        std::to_string(out.conditionNumber) + " exceeds 1e12");
  }
  out.conditionNumber = std::max(1.0, out.conditionNumber);
  out.inverseVectors = out.vectors.partialPivLu().inverse();
  return out;
}

/// f(A) = V diag(f(lambda_i)) V^{-1}. Defective (Jordan) inputs are rejected.
template <typename Derived, typename F>
DenseMatrix funm_dense_oracle(const Eigen::MatrixBase<Derived>& a, F&& f) {
  const EigenDecomposition ed = eigen_decompose(a);
  DenseVector fl(ed.eigenvalues.size());
  for (Index i = 0; i < fl.size(); ++i) fl(i) = f(ed.eigenvalues(i));
  DenseMatrix out = ed.vectors * fl.asDiagonal() * ed.inverseVectors;
  detail::require_finite(out, "funm_dense_oracle");
  return out;
}

/// cond_2(V) for the computed, column-normalized eigenvector matrix. This is
/// an upper proxy for the infimum over all diagonalizing similarities.
template <typename Derived>
double spectral_cond_kappa(const Eigen::MatrixBase<Derived>& a) {
  return eigen_decompose(a).conditionNumber;
}

template <typename Derived>
DenseVector eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  detail::require_square(a, "eigenvalues");
  detail::require_finite(a, "eigenvalues");
  const DenseMatrix ac = a.template cast<Complex>();
  if (detail::is_hermitian(ac)) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(ac, Eigen::EigenvaluesOnly);
    return es.eigenvalues().template cast<Complex>();
  }
  Eigen::ComplexEigenSolver<DenseMatrix> es(ac, false);
  return es.eigenvalues();
}

struct NumericalRangeSample {
  double angle = 0.0;          // theta_k
  double support = 0.0;        // largest eigenvalue of Herm(e^{-i theta} A)
  Complex point;               // x^* A x
  DenseVector vector;          // unit vector x
};

/// Boundary points of the numerical range via the extreme eigenpairs of the
/// Hermitian part of e^{-i theta_k} A (Johnson's method).
template <typename Derived>
std::vector<NumericalRangeSample> numerical_range_boundary(const Eigen::MatrixBase<Derived>& a,
                                                           int nAngles) {
  detail::require_square(a, "numerical_range_boundary");
  detail::require_finite(a, "numerical_range_boundary");
  if (nAngles < 3) throw InvalidArgument("numerical_range_boundary: nAngles must be >= 3");
  const DenseMatrix ac = a.template cast<Complex>();
  std::vector<NumericalRangeSample> out;
  out.reserve(static_cast<std::size_t>(nAngles));
  for (int k = 0; k < nAngles; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / nAngles;
    const Complex rot = std::polar(1.0, -theta);
    const DenseMatrix rotated = rot * ac;
    const DenseMatrix herm = 0.5 * (rotated + rotated.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm);
    const Index top = herm.rows() - 1;
    NumericalRangeSample s;
    s.angle = theta;
    s.support = es.eigenvalues()(top);
    s.vector = es.eigenvectors().col(top);
    s.point = s.vector.dot(ac * s.vector);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace qsfunm
