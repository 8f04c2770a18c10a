#ifndef TCOV_PROJECTIONS_HPP
#define TCOV_PROJECTIONS_HPP

#include <functional>
#include <string>
#include <vector>

#include "tcov/hermitian.hpp"
#include "tcov/structure.hpp"

namespace tcov {

/**
 * Frobenius-nearest member of a linear structure (Toeplitz, banded, TBT).
 *
 * Entries tied to the same parameter are averaged, with the lower triangle
 * entering conjugated, so the result is Hermitian even when `a` is not.
 * Throws ValidationError for LowRankPlusScalar/ToeplitzCondNum specs.
 */
HermitianMatrix project_structure(const Matrix& a, const StructureSpec& spec);
HermitianMatrix project_structure(const HermitianMatrix& a, const StructureSpec& spec);

/// First row of a Hermitian Toeplitz matrix and its inverse map.
RowVectorXc toeplitz_first_row(const HermitianMatrix& a);
HermitianMatrix toeplitz_from_first_row(const Eigen::Ref<const Vector>& row);

/// Mean of the `blocks` diagonal blocks of `a`.
Matrix average_diagonal_blocks(const Matrix& a, Index blocks);

/// I_Bc ⊗ b for a square b.
HermitianMatrix block_repeat(const HermitianMatrix& b, Index blocks);

/**
 * Block-diagonal matrix with identical diagonal blocks equal to the
 * structure projection of the average diagonal block. Non-linear specs use
 * their Toeplitz part.
 */
HermitianMatrix project_block_repeated(const HermitianMatrix& a, const StructureSpec& inner_spec);

HermitianMatrix project_psd_cone(const HermitianMatrix& a);

/// Nearest matrix Z with Z - lower PSD.
HermitianMatrix project_lmi(const HermitianMatrix& a, const HermitianMatrix& lower);

/**
 * Minimizer u* >= 0 of Σ (clamp(γ_i, u, κu) - γ_i)^2.
 *
 * Exact search over the quadratic pieces between the breakpoints {γ_i},
 * {γ_i/κ}, 0. Among minimizers the smallest u is returned. u* = 0 only when
 * no γ_i is positive.
 */
double solve_waterlevel(const RealVector& gamma, double kappa);

/// Spectrum clipped to [u*, κu*] in the eigenbasis of `a`.
HermitianMatrix project_cond_number(const HermitianMatrix& a, double kappa);

struct LowRankProjection {
  HermitianMatrix matrix;
  double sigma = 0.0;
  /// True when σ* exceeds β_r, i.e. the low-rank part is not PSD.
  bool ordering_violated = false;
};

/// Keeps the r leading eigenvalues and replaces the tail by its mean (>= 0).
LowRankProjection project_lowrank_plus_scalar(const HermitianMatrix& a, Index r);

/// Applies `project` to each m×m diagonal block; off-diagonal blocks are kept.
HermitianMatrix project_blockwise(const HermitianMatrix& a, Index m,
                                  const std::function<HermitianMatrix(const HermitianMatrix&)>& project);

struct ProjectionSet {
  std::string name;
  std::function<HermitianMatrix(const HermitianMatrix&)> project;
  bool convex = true;
};

enum class IntersectionMode { Dykstra, POCS };

struct IntersectionOptions {
  IntersectionMode mode = IntersectionMode::Dykstra;
  double tol = 1e-8;
  Index max_iter = 5000;
};

/// Dykstra corrections, one per set. Passing the state of a previous run on a
/// nearby problem warm-starts the dual variables.
struct DykstraState {
  std::vector<HermitianMatrix> corrections;
  Index iterations = 0;
};

struct IntersectionResult {
  HermitianMatrix point;
  Index iterations = 0;
  bool converged = false;
};

/**
 * Cyclic projection onto the intersection of `sets`, in the given order.
 *
 * Dykstra mode keeps one correction per set (zero initially):
 *   Y = P(T + C), C <- T + C - Y, T <- Y.
 * With a non-empty `state` the run starts from T = init - Σ C instead, which
 * keeps the invariant T = init - Σ C of the zero-initialized recursion.
 * POCS applies the raw projections. A cycle ends after the last set; the run
 * stops when ‖T_cycle - T_prev‖_F <= tol·‖T_prev‖_F. Dykstra mode rejects
 * non-convex sets.
 */
IntersectionResult project_intersection(const HermitianMatrix& init, const std::vector<ProjectionSet>& sets,
                                        const IntersectionOptions& options = {}, DykstraState* state = nullptr);

}  // namespace tcov

#endif  // TCOV_PROJECTIONS_HPP
