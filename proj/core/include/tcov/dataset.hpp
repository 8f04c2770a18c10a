#ifndef TCOV_DATASET_HPP
#define TCOV_DATASET_HPP

#include "tcov/hermitian.hpp"

namespace tcov {

/**
 * Snapshot matrix with its sample covariance and the rank-one reduced
 * constraint used by the inner solvers.
 *
 * With a factor R̄ of the SCM (R̄ R̄^H = SCM) and r̄ = vec(R̄) (column
 * stacking), Tr(X^{-1} SCM) <= 1 holds iff I_m ⊗ X ⪰ r̄ r̄^H, which is an
 * m²×m² constraint independent of n.
 */
struct DataSet {
  Matrix samples;  // m × n, one snapshot per column
  HermitianMatrix scm = HermitianMatrix::zero(1);
  Matrix factor;   // R̄
  Vector reduced_vector;  // r̄ = vec(R̄)

  Index dim() const { return samples.rows(); }
  Index count() const { return samples.cols(); }

  /// R̄_SCM = r̄ r̄^H (m² × m²).
  HermitianMatrix reduced_constraint() const;
};

/// Builds the SCM (1/n) Σ y y^H, its factor and r̄ from m × n snapshots.
DataSet build_dataset(const Matrix& samples);

/// Snapshots divided by sqrt(s); the SCM is divided by s.
DataSet rescaled(const DataSet& data, double s);

}  // namespace tcov

#endif  // TCOV_DATASET_HPP
