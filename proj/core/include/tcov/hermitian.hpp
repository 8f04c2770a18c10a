#ifndef TCOV_HERMITIAN_HPP
#define TCOV_HERMITIAN_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tcov {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;
using RowVectorXc = Eigen::RowVectorXcd;

/// Thrown when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Relative asymmetry accepted by the checked HermitianMatrix constructor.
inline constexpr double kHermitianTolerance = 1e-8;

/**
 * Dense complex Hermitian matrix.
 *
 * Every constructor stores the Hermitian part (A + A^H)/2 of its input, so the
 * stored entries are exactly conjugate-symmetric. The checked constructor
 * additionally rejects inputs whose asymmetry exceeds kHermitianTolerance
 * relative to the largest entry.
 */
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const Matrix& a, double tol = kHermitianTolerance);

  /// Hermitian part of `a` without an asymmetry check.
  static HermitianMatrix hermitian_part(const Matrix& a);
  static HermitianMatrix identity(Index m);
  static HermitianMatrix zero(Index m);
  static HermitianMatrix diagonal(const RealVector& d);

  Index dim() const { return a_.rows(); }
  const Matrix& matrix() const { return a_; }
  Complex operator()(Index i, Index k) const { return a_(i, k); }

  double trace() const { return a_.diagonal().real().sum(); }
  double frobenius_norm() const { return a_.norm(); }

  /// Real inner product Re Tr(A^H B).
  double inner(const HermitianMatrix& other) const;

  HermitianMatrix operator+(const HermitianMatrix& other) const;
  HermitianMatrix operator-(const HermitianMatrix& other) const;
  HermitianMatrix operator*(double s) const;
  HermitianMatrix& operator+=(const HermitianMatrix& other);
  HermitianMatrix& operator-=(const HermitianMatrix& other);
  HermitianMatrix& operator*=(double s);

 private:
  struct Unchecked {};
  HermitianMatrix(Matrix a, Unchecked);

  Matrix a_;
};

inline HermitianMatrix operator*(double s, const HermitianMatrix& a) { return a * s; }

/// Largest absolute deviation |a_ik - conj(a_ki)|.
double hermitian_error(const Matrix& a);

/// ‖a - b‖_F / max(‖b‖_F, tiny).
double relative_frobenius(const Matrix& a, const Matrix& b);

struct EigenDecomposition {
  RealVector eigenvalues;  // descending
  Matrix eigenvectors;     // columns, unitary

  HermitianMatrix reconstruct() const;
};

/// Eigen-decomposition with eigenvalues sorted in decreasing order.
EigenDecomposition hermitian_evd(const HermitianMatrix& a);

/// Checked variant for raw input: throws ValidationError when `a` is not
/// Hermitian within kHermitianTolerance.
EigenDecomposition hermitian_evd(const Matrix& a);

/**
 * Square-root factor F with F F^H = a.
 *
 * Lower-triangular Cholesky when `a` is strictly positive definite, otherwise
 * the eigen-based factor V diag(max(λ,0))^{1/2}. Rank-deficient sample
 * covariances (fewer samples than dimensions) go through the second branch.
 */
Matrix cholesky_or_sqrt_factor(const HermitianMatrix& a);

HermitianMatrix pd_inverse(const HermitianMatrix& a);

/// Principal square root of a positive semidefinite matrix.
HermitianMatrix psd_sqrt(const HermitianMatrix& a);

/// log|a| for positive definite `a`; throws ValidationError otherwise.
double logdet_pd(const HermitianMatrix& a);

/// Smallest eigenvalue.
double min_eigenvalue(const HermitianMatrix& a);

/// λ_max / λ_min; +inf when λ_min <= 0.
double condition_number(const HermitianMatrix& a);

}  // namespace tcov

#endif  // TCOV_HERMITIAN_HPP
