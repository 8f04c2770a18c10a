#ifndef TCOV_CRLB_HPP
#define TCOV_CRLB_HPP

#include <iosfwd>
#include <vector>

#include "tcov/hermitian.hpp"
#include "tcov/structure.hpp"

namespace tcov {

/**
 * Real parametrization of a Toeplitz, banded Toeplitz or TBT covariance.
 *
 * Toeplitz:  θ = [r1, Re r2..Re rm, Im r2..Im rm]            (2m-1)
 * Banded(b): θ = [r1, Re r2..Re r(b+1), Im r2..Im r(b+1)]    (2b+1)
 * TBT(p,l):  p groups of 2l-1, group z holding the Toeplitz
 *            parameters of the block R_z                     ((2l-1)p)
 */
struct ThetaParam {
  StructureSpec structure;
  Index dim = 0;  // m
  RealVector theta;
  double n = 1.0;

  Index size() const;
};

/// Number of real parameters of `spec` at dimension m.
Index theta_size(const StructureSpec& spec, Index m);

/// ∂R/∂θ_i, one Hermitian matrix per component.
std::vector<HermitianMatrix> build_derivatives(const StructureSpec& spec, Index m);
std::vector<HermitianMatrix> build_derivatives(const ThetaParam& p);

/// R(θ) = Σ θ_i ∂R/∂θ_i.
HermitianMatrix covariance_from_theta(const StructureSpec& spec, Index m, const RealVector& theta);

/// Reads θ off a matrix of the given structure (first rows of the blocks).
RealVector theta_from_covariance(const StructureSpec& spec, const HermitianMatrix& r);

/// F_ik = n Re Tr(R^{-1} D_i R^{-1} D_k).
RealMatrix fisher_information(const ThetaParam& p, const HermitianMatrix& r);

/**
 * Indices of θ whose variances add up to the bound on first-row entry i
 * (0-based). One index for real entries, two for complex ones.
 */
std::vector<Index> coefficient_theta_indices(const StructureSpec& spec, Index m, Index i);

struct CrlbReport {
  RealMatrix fim;
  RealVector bounds;        // one per first-row entry of R
  double sum_bound = 0.0;   // Σ bounds
  double mean_bound = 0.0;  // sum_bound / number of entries, comparable to the first-row MSE
};

CrlbReport crlb_report(const ThetaParam& p, const HermitianMatrix& r);

/// Columns coeff_index, bound; last row "sum_bound".
void write_crlb_csv(std::ostream& os, const CrlbReport& report);

}  // namespace tcov

#endif  // TCOV_CRLB_HPP
