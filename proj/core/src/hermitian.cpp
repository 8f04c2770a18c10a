#include "tcov/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tcov {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

// Eigenvalues below -kIndefiniteTolerance * scale make a PSD-only routine fail.
constexpr double kIndefiniteTolerance = 1e-8;

double spectral_scale(const RealVector& lambda) {
  return std::max(lambda.cwiseAbs().maxCoeff(), kTiny);
}

void require_psd(const RealVector& lambda, const char* what) {
  const double lmin = lambda.minCoeff();
  if (lmin < -kIndefiniteTolerance * spectral_scale(lambda)) {
    throw ValidationError(std::string(what) + ": matrix is indefinite (smallest eigenvalue " +
                          std::to_string(lmin) + ")");
  }
}

Eigen::LLT<Matrix> checked_llt(const HermitianMatrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) {
    throw ValidationError(std::string(what) + ": matrix is not positive definite");
  }
  return llt;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) {
    throw ValidationError("HermitianMatrix: matrix is not square");
  }
  if (a.rows() < 1) {
    throw ValidationError("HermitianMatrix: dimension must be at least 1");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double err = hermitian_error(a);
  if (!(err <= tol * scale)) {
    throw ValidationError("HermitianMatrix: input is not Hermitian (asymmetry " +
                          std::to_string(err) + ")");
  }
  a_ = 0.5 * (a + a.adjoint());
}

HermitianMatrix::HermitianMatrix(Matrix a, Unchecked) : a_(std::move(a)) {}

HermitianMatrix HermitianMatrix::hermitian_part(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw ValidationError("HermitianMatrix: matrix must be square with dimension >= 1");
  }
  return HermitianMatrix(Matrix(0.5 * (a + a.adjoint())), Unchecked{});
}

HermitianMatrix HermitianMatrix::identity(Index m) {
  if (m < 1) throw ValidationError("HermitianMatrix: dimension must be at least 1");
  return HermitianMatrix(Matrix::Identity(m, m), Unchecked{});
}

HermitianMatrix HermitianMatrix::zero(Index m) {
  if (m < 1) throw ValidationError("HermitianMatrix: dimension must be at least 1");
  return HermitianMatrix(Matrix::Zero(m, m), Unchecked{});
}

HermitianMatrix HermitianMatrix::diagonal(const RealVector& d) {
  if (d.size() < 1) throw ValidationError("HermitianMatrix: dimension must be at least 1");
  Matrix a = Matrix::Zero(d.size(), d.size());
  a.diagonal() = d.cast<Complex>();
  return HermitianMatrix(std::move(a), Unchecked{});
}

double HermitianMatrix::inner(const HermitianMatrix& other) const {
  return (a_.conjugate().cwiseProduct(other.a_)).sum().real();
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& other) const {
  HermitianMatrix out = *this;
  out += other;
  return out;
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& other) const {
  HermitianMatrix out = *this;
  out -= other;
  return out;
}

HermitianMatrix HermitianMatrix::operator*(double s) const {
  HermitianMatrix out = *this;
  out *= s;
  return out;
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
  if (other.dim() != dim()) throw ValidationError("HermitianMatrix: dimension mismatch");
  a_ += other.a_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& other) {
  if (other.dim() != dim()) throw ValidationError("HermitianMatrix: dimension mismatch");
  a_ -= other.a_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  a_ *= s;
  return *this;
}

double hermitian_error(const Matrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double relative_frobenius(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(b.norm(), kTiny);
}

HermitianMatrix EigenDecomposition::reconstruct() const {
  return HermitianMatrix::hermitian_part(eigenvectors * eigenvalues.cast<Complex>().asDiagonal() *
                                         eigenvectors.adjoint());
}

EigenDecomposition hermitian_evd(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_evd: eigen-solver did not converge");
  }
  // Eigen sorts ascending.
  EigenDecomposition out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors = es.eigenvectors().rowwise().reverse();
  return out;
}

EigenDecomposition hermitian_evd(const Matrix& a) { return hermitian_evd(HermitianMatrix(a)); }

Matrix cholesky_or_sqrt_factor(const HermitianMatrix& a) {
  const EigenDecomposition evd = hermitian_evd(a);
  require_psd(evd.eigenvalues, "cholesky_or_sqrt_factor");
  const double lmax = evd.eigenvalues(0);
  const double lmin = evd.eigenvalues(evd.eigenvalues.size() - 1);
  if (lmax > 0.0 && lmin > 1e-12 * lmax) {
    Eigen::LLT<Matrix> llt(a.matrix());
    if (llt.info() == Eigen::Success) {
      return llt.matrixL();
    }
  }
  return evd.eigenvectors * evd.eigenvalues.cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal();
}

HermitianMatrix pd_inverse(const HermitianMatrix& a) {
  const auto llt = checked_llt(a, "pd_inverse");
  const Index m = a.dim();
  return HermitianMatrix::hermitian_part(llt.solve(Matrix::Identity(m, m)));
}

HermitianMatrix psd_sqrt(const HermitianMatrix& a) {
  const EigenDecomposition evd = hermitian_evd(a);
  require_psd(evd.eigenvalues, "psd_sqrt");
  // V λ^{1/4} times its adjoint gives V λ^{1/2} V^H.
  const RealVector quarter = evd.eigenvalues.cwiseMax(0.0).array().sqrt().sqrt().matrix();
  const Matrix half = evd.eigenvectors * quarter.cast<Complex>().asDiagonal();
  return HermitianMatrix::hermitian_part(half * half.adjoint());
}

double logdet_pd(const HermitianMatrix& a) {
  const auto llt = checked_llt(a, "logdet_pd");
  const Matrix& l = llt.matrixLLT();
  double s = 0.0;
  for (Index i = 0; i < a.dim(); ++i) s += std::log(l(i, i).real());
  return 2.0 * s;
}

double min_eigenvalue(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double condition_number(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(a.dim() - 1);
  if (lmin <= 0.0) return std::numeric_limits<double>::infinity();
  return lmax / lmin;
}

}  // namespace tcov
