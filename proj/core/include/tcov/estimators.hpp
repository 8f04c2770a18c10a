#ifndef TCOV_ESTIMATORS_HPP
#define TCOV_ESTIMATORS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcov/dataset.hpp"
#include "tcov/hermitian.hpp"
#include "tcov/projections.hpp"
#include "tcov/structure.hpp"

namespace tcov {

enum class InnerMode { ADMM, Dykstra, POCS };

std::string to_string(InnerMode mode);

struct EstimatorConfig {
  std::optional<double> rho;  // ADMM penalty at unit mean diagonal of X; m when unset
  double outer_tol = 1e-4;
  Index outer_max_iter = 1000;
  double inner_tol = 1e-8;
  Index inner_max_iter = 5000;
  InnerMode inner_mode = InnerMode::Dykstra;
  /// Run the iterations on rescaled data such that X₀ has average diagonal
  /// `working_scale`. The proximal surrogate is not scale invariant, so this
  /// sets its effective step length.
  bool normalize_scale = true;
  double working_scale = 10.0;
  /// Seeds a random PSD initial ADMM multiplier instead of zero.
  std::optional<std::uint64_t> multiplier_seed;

  void validate() const;
};

enum class StopReason { Converged, MaxIterations, NoDescent };

std::string to_string(StopReason reason);

struct MMRecord {
  Index iter = 0;
  double nll = 0.0;       // f(R_t) with R_t = X_t/m, original data scale
  double logdet_x = 0.0;  // log|X_t|, original data scale
  double rel_change = 0.0;
  Index inner_iters = 0;
  bool inner_converged = true;
};

struct MMTrace {
  std::vector<MMRecord> records;  // records[0] is the initial point
  StopReason stop = StopReason::MaxIterations;
  bool inner_warning = false;  // some inner solve hit its iteration cap
  Index pd_loads = 0;          // iterates that needed diagonal loading
  Index ordering_violations = 0;
  double rejected_increase = 0.0;  // logdet rise of the step refused by a NoDescent stop

  /// Columns iter, nll, logdet_x, rel_change, inner_iters.
  void write_csv(std::ostream& os) const;
};

struct Estimate {
  HermitianMatrix r;
  MMTrace trace;
};

/// (1/n) Σ y^H R^{-1} y + log|R|.
double negative_log_likelihood(const HermitianMatrix& r, const DataSet& data);

/// m·(P_T(SCM) + δI) with δ = max(0, 1e-3·Tr(SCM)/m - λ_min(P_T(SCM))).
HermitianMatrix init_x0(const DataSet& data);

/// Structure-aware variant: the returned X₀ is PD and lies in (or, for the
/// low-rank set, close to) the set described by `spec`.
HermitianMatrix init_x0(const DataSet& data, const StructureSpec& spec);

/// Inner objective Tr(G X) + q·Tr(X²).
struct SurrogateObjective {
  HermitianMatrix g;
  double q = 0.0;
};

/// Linearized log-determinant: G = X_t^{-1}, q = 0.
SurrogateObjective linear_surrogate(const HermitianMatrix& xt);

/// Proximal form: G = -2(X_t - 0.5 X_t^{-1}), q = 1.
SurrogateObjective proximal_surrogate(const HermitianMatrix& xt);

/// ADMM variables; carried across outer iterations as a warm start.
struct Atom1State {
  HermitianMatrix x = HermitianMatrix::zero(1);
  HermitianMatrix u = HermitianMatrix::zero(1);
  HermitianMatrix multiplier = HermitianMatrix::zero(1);
  Index blocks = 0;  // 0 marks an uninitialized state
  double rho = 0.0;  // penalty in the units of the first x_start

  bool initialized() const { return blocks > 0; }
};

struct InnerResult {
  HermitianMatrix x;
  Index iterations = 0;
  bool converged = false;
  bool ordering_violated = false;
};

/**
 * ADMM for min Tr(G X) + q·Tr(X²) over Hermitian Toeplitz X subject to
 * I ⊗ X - U = R̄_SCM, U ⪰ 0.
 *
 * Stops when both the primal residual ‖I⊗X - U - R̄_SCM‖_F/m and the dual
 * residual ρ‖I⊗(X_k - X_{k-1})‖_F/m are at most cfg.inner_tol. The penalty
 * is ρ = cfg.rho/d² with d the mean diagonal of x_start (of the first call when
 * a state is carried).
 */
InnerResult solve_admm(const SurrogateObjective& objective, const HermitianMatrix& x_start, const DataSet& data,
                       const EstimatorConfig& cfg, Atom1State* state = nullptr);

/// ADMM on the linear surrogate at `xt`.
InnerResult solve_surrogate_admm(const HermitianMatrix& xt, const DataSet& data, const EstimatorConfig& cfg,
                                 Atom1State* state = nullptr);

/**
 * Nearest point to I⊗B, B = X_t - 0.5 X_t^{-1}, in the intersection of the
 * block-repeated structure, the optional spectral set of `spec` (applied per
 * diagonal block) and {Z ⪰ R̄_SCM}. Returns the structure projection of the
 * mean diagonal block of the final iterate.
 */
InnerResult solve_surrogate_projection(const HermitianMatrix& xt, const DataSet& data, const StructureSpec& spec,
                                       const EstimatorConfig& cfg, DykstraState* state = nullptr);

/// MM iterations X_{t+1} = inner(X_t); returns R = X/m and the trace.
Estimate estimate(const DataSet& data, const StructureSpec& spec, const EstimatorConfig& cfg);

HermitianMatrix scm_estimate(const DataSet& data);

}  // namespace tcov

#endif  // TCOV_ESTIMATORS_HPP
