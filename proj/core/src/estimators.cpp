#include "tcov/estimators.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "tcov/matrix_io.hpp"
#include "tcov/projections.hpp"

namespace tcov {

namespace {

Matrix kron_identity(const Matrix& x, Index blocks) {
  const Index m = x.rows();
  Matrix out = Matrix::Zero(m * blocks, m * blocks);
  for (Index i = 0; i < blocks; ++i) out.block(i * m, i * m, m, m) = x;
  return out;
}

// Tr(X^{-1} S) for PD X.
double constraint_value(const HermitianMatrix& x, const HermitianMatrix& s) {
  Eigen::LLT<Matrix> llt(x.matrix());
  if (llt.info() != Eigen::Success) throw ValidationError("constraint_value: iterate is not positive definite");
  return llt.solve(s.matrix()).trace().real();
}

// f(R) = Tr(R^{-1} S) + log|R| evaluated from the SCM.
double nll_from_scm(const HermitianMatrix& r, const HermitianMatrix& s) {
  return constraint_value(r, s) + logdet_pd(r);
}

// Adds λ-shift loading so the smallest eigenvalue is at least `floor_rel`·Tr/m.
HermitianMatrix load_to_floor(const HermitianMatrix& p, double floor_rel) {
  const Index m = p.dim();
  const double target = floor_rel * std::max(p.trace(), 0.0) / static_cast<double>(m);
  const double delta = std::max(0.0, target - min_eigenvalue(p));
  return delta > 0.0 ? p + HermitianMatrix::identity(m) * delta : p;
}

HermitianMatrix lowrank_start(const HermitianMatrix& p, Index r) {
  HermitianMatrix z = p;
  for (int it = 0; it < 500; ++it) {
    const HermitianMatrix next = project_structure(project_lowrank_plus_scalar(z, r).matrix, StructureSpec::toeplitz());
    const double change = (next.matrix() - z.matrix()).norm();
    z = next;
    if (change <= 1e-12 * z.frobenius_norm()) break;
  }
  return project_lowrank_plus_scalar(z, r).matrix;
}

// Feasible start Tr(X^{-1} S) = 1 derived from X₀: either the rescaled c·X₀ or
// the loaded X₀ + tI, whichever has the smaller log-determinant. Loading
// wins when X₀ has a near-null direction that the SCM does not share.
HermitianMatrix feasible_start(const HermitianMatrix& x0, const HermitianMatrix& s) {
  const Index m = x0.dim();
  const HermitianMatrix scaled = x0 * constraint_value(x0, s);
  const EigenDecomposition evd = hermitian_evd(x0);
  const RealVector w = (evd.eigenvectors.adjoint() * s.matrix() * evd.eigenvectors).diagonal().real();
  const RealVector& lam = evd.eigenvalues;
  auto phi = [&](double t) { return (w.array() / (lam.array() + t)).sum() - 1.0; };
  if (phi(0.0) <= 0.0) return scaled;
  // φ is convex and decreasing, so Newton from the left converges monotonically.
  double t = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double f = phi(t);
    const double df = -(w.array() / (lam.array() + t).square()).sum();
    const double step = f / df;
    t -= step;
    if (std::abs(step) <= 1e-15 * std::max(t, 1.0) || f <= 0.0) break;
  }
  HermitianMatrix loaded = x0 + HermitianMatrix::identity(m) * t;
  loaded *= constraint_value(loaded, s);
  return logdet_pd(loaded) < logdet_pd(scaled) ? loaded : scaled;
}

}  // namespace

std::string to_string(InnerMode mode) {
  switch (mode) {
    case InnerMode::ADMM:
      return "admm";
    case InnerMode::Dykstra:
      return "dykstra";
    case InnerMode::POCS:
      return "pocs";
  }
  return "?";
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Converged:
      return "converged";
    case StopReason::MaxIterations:
      return "max_iterations";
    case StopReason::NoDescent:
      return "no_descent";
  }
  return "?";
}

void EstimatorConfig::validate() const {
  if (rho && !(*rho > 0.0)) throw ValidationError("rho must be positive");
  if (!(outer_tol > 0.0)) throw ValidationError("outer_tol must be positive");
  if (!(inner_tol > 0.0)) throw ValidationError("inner_tol must be positive");
  if (outer_max_iter < 1) throw ValidationError("outer_max_iter must be at least 1");
  if (inner_max_iter < 1) throw ValidationError("inner_max_iter must be at least 1");
  if (!(working_scale > 0.0) || !std::isfinite(working_scale)) {
    throw ValidationError("working_scale must be positive and finite");
  }
}

void MMTrace::write_csv(std::ostream& os) const {
  os << "iter,nll,logdet_x,rel_change,inner_iters\n";
  for (const auto& r : records) {
    os << r.iter << ',' << format_double(r.nll) << ',' << format_double(r.logdet_x) << ','
       << format_double(r.rel_change) << ',' << r.inner_iters << '\n';
  }
}

double negative_log_likelihood(const HermitianMatrix& r, const DataSet& data) {
  if (r.dim() != data.dim()) throw ValidationError("negative_log_likelihood: dimension mismatch");
  Eigen::LLT<Matrix> llt(r.matrix());
  if (llt.info() != Eigen::Success) {
    throw ValidationError("negative_log_likelihood: covariance is not positive definite");
  }
  const Matrix z = llt.matrixL().solve(data.samples);
  double ld = 0.0;
  for (Index i = 0; i < r.dim(); ++i) ld += std::log(llt.matrixLLT()(i, i).real());
  return z.squaredNorm() / static_cast<double>(data.count()) + 2.0 * ld;
}

HermitianMatrix init_x0(const DataSet& data) { return init_x0(data, StructureSpec::toeplitz()); }

HermitianMatrix init_x0(const DataSet& data, const StructureSpec& spec) {
  const Index m = data.dim();
  spec.validate(m);
  const auto md = static_cast<double>(m);
  const HermitianMatrix p = load_to_floor(project_structure(data.scm, spec.linear_part()), 1e-3);
  switch (spec.kind) {
    case StructureKind::ToeplitzCondNum: {
      if (spec.kappa == 1.0) return HermitianMatrix::identity(m) * p.trace();
      Eigen::SelfAdjointEigenSolver<Matrix> es(p.matrix(), Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues()(0);
      const double lmax = es.eigenvalues()(m - 1);
      const double d = std::max(0.0, (lmax - spec.kappa * lmin) / (spec.kappa - 1.0));
      // A little slack keeps X₀ strictly inside the condition-number set.
      return (p + HermitianMatrix::identity(m) * (d * (1.0 + 1e-9))) * md;
    }
    case StructureKind::LowRankPlusScalar:
      return load_to_floor(lowrank_start(p, spec.rank), 1e-3) * md;
    default:
      return p * md;
  }
}

SurrogateObjective linear_surrogate(const HermitianMatrix& xt) { return {pd_inverse(xt), 0.0}; }

SurrogateObjective proximal_surrogate(const HermitianMatrix& xt) {
  return {(xt - pd_inverse(xt) * 0.5) * -2.0, 1.0};
}

InnerResult solve_admm(const SurrogateObjective& objective, const HermitianMatrix& x_start, const DataSet& data,
                       const EstimatorConfig& cfg, Atom1State* state) {
  const Index m = data.dim();
  if (x_start.dim() != m || objective.g.dim() != m) throw ValidationError("solve_admm: dimension mismatch");
  const auto md = static_cast<double>(m);
  const HermitianMatrix rbar_h = data.reduced_constraint();
  const Matrix& rbar = rbar_h.matrix();

  Atom1State local;
  Atom1State& st = state != nullptr ? *state : local;
  if (!st.initialized() || st.blocks != m) {
    st.x = x_start;
    st.blocks = m;
    // The augmented term grows with the square of the scale of X while the
    // surrogate objective does not, so rho is set for a unit mean diagonal.
    const double unit = std::abs(x_start.trace()) / md;
    st.rho = cfg.rho.value_or(md) / (unit * unit);
    if (cfg.multiplier_seed) {
      std::mt19937_64 rng(*cfg.multiplier_seed);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      RealMatrix v(m * m, m * m);
      for (Index k = 0; k < v.size(); ++k) v(k) = unif(rng);
      st.multiplier = HermitianMatrix::hermitian_part((v * v.transpose() / (md * md * md * md)).cast<Complex>());
    } else {
      st.multiplier = HermitianMatrix::zero(m * m);
    }
    st.u = project_psd_cone(HermitianMatrix::hermitian_part(kron_identity(st.x.matrix(), m) - rbar));
  }

  const double rho = st.rho;
  Matrix x = st.x.matrix();
  Matrix lam = st.multiplier.matrix();
  Matrix u = st.u.matrix();
  const Matrix& g = objective.g.matrix();
  InnerResult out{st.x, 0, false, false};
  for (Index k = 1; k <= cfg.inner_max_iter; ++k) {
    u = project_psd_cone(HermitianMatrix::hermitian_part(kron_identity(x, m) + lam / rho - rbar)).matrix();
    Matrix acc = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
      acc += rbar.block(i * m, i * m, m, m) + u.block(i * m, i * m, m, m) - lam.block(i * m, i * m, m, m) / rho;
    }
    const Matrix lambda_arg = (rho * acc - g) / (rho * md + 2.0 * objective.q);
    const Matrix xn = project_structure(lambda_arg, StructureSpec::toeplitz()).matrix();
    const Matrix resid = kron_identity(xn, m) - u - rbar;
    lam += rho * resid;
    lam = 0.5 * (lam + lam.adjoint()).eval();
    const double primal = resid.norm() / md;
    const double dual = rho * std::sqrt(md) * (xn - x).norm() / md;
    x = xn;
    out.iterations = k;
    if (primal <= cfg.inner_tol && dual <= cfg.inner_tol) {
      out.converged = true;
      break;
    }
  }
  st.x = HermitianMatrix::hermitian_part(x);
  st.u = HermitianMatrix::hermitian_part(u);
  st.multiplier = HermitianMatrix::hermitian_part(lam);
  out.x = st.x;
  return out;
}

InnerResult solve_surrogate_admm(const HermitianMatrix& xt, const DataSet& data, const EstimatorConfig& cfg,
                                 Atom1State* state) {
  return solve_admm(linear_surrogate(xt), xt, data, cfg, state);
}

InnerResult solve_surrogate_projection(const HermitianMatrix& xt, const DataSet& data, const StructureSpec& spec,
                                       const EstimatorConfig& cfg, DykstraState* state) {
  const Index m = data.dim();
  if (xt.dim() != m) throw ValidationError("solve_surrogate_projection: dimension mismatch");
  spec.validate(m);
  const StructureSpec lin = spec.linear_part();
  const HermitianMatrix b = xt - pd_inverse(xt) * 0.5;
  const HermitianMatrix rbar = data.reduced_constraint();

  bool violated = false;
  std::vector<ProjectionSet> sets;
  sets.push_back({"structure", [&](const HermitianMatrix& z) { return project_block_repeated(z, lin); }, true});
  if (spec.kind == StructureKind::ToeplitzCondNum) {
    const double kappa = spec.kappa;
    sets.push_back({"condition_number",
                    [m, kappa](const HermitianMatrix& z) {
                      return project_blockwise(z, m, [kappa](const HermitianMatrix& blk) {
                        return project_cond_number(blk, kappa);
                      });
                    },
                    true});
  } else if (spec.kind == StructureKind::LowRankPlusScalar) {
    const Index r = spec.rank;
    sets.push_back({"lowrank_plus_scalar",
                    [m, r, &violated](const HermitianMatrix& z) {
                      return project_blockwise(z, m, [r, &violated](const HermitianMatrix& blk) {
                        auto p = project_lowrank_plus_scalar(blk, r);
                        violated = p.ordering_violated;
                        return p.matrix;
                      });
                    },
                    false});
  }
  sets.push_back({"lmi", [&](const HermitianMatrix& z) { return project_lmi(z, rbar); }, true});

  IntersectionOptions opt;
  opt.tol = cfg.inner_tol;
  opt.max_iter = cfg.inner_max_iter;
  const bool pocs = cfg.inner_mode == InnerMode::POCS || spec.kind == StructureKind::LowRankPlusScalar;
  opt.mode = pocs ? IntersectionMode::POCS : IntersectionMode::Dykstra;
  const IntersectionResult res = project_intersection(block_repeat(b, m), sets, opt, state);

  const Matrix mean_block = average_diagonal_blocks(res.point.matrix(), m);
  HermitianMatrix x = spec.kind == StructureKind::LowRankPlusScalar
                          ? project_lowrank_plus_scalar(HermitianMatrix::hermitian_part(mean_block), spec.rank).matrix
                          : project_structure(mean_block, lin);
  return {x, res.iterations, res.converged, violated};
}

Estimate estimate(const DataSet& data, const StructureSpec& spec, const EstimatorConfig& cfg) {
  cfg.validate();
  const Index m = data.dim();
  spec.validate(m);
  if (cfg.inner_mode == InnerMode::ADMM && spec.kind != StructureKind::Toeplitz) {
    throw ValidationError("ADMM inner solver supports only the Toeplitz structure, got '" + spec.to_string() + "'");
  }
  const auto md = static_cast<double>(m);

  HermitianMatrix x = init_x0(data, spec);
  if (spec.kind == StructureKind::ToeplitzCondNum || spec.kind == StructureKind::LowRankPlusScalar) {
    // Loading would leave these sets; rescaling stays inside them.
    x *= constraint_value(x, data.scm);
  } else {
    x = feasible_start(x, data.scm);
  }
  const double s = cfg.normalize_scale ? x.trace() / (md * cfg.working_scale) : 1.0;
  const DataSet work = s == 1.0 ? data : rescaled(data, s);
  x *= 1.0 / s;
  const double log_s = md * std::log(s);

  auto record = [&](Index iter, const HermitianMatrix& xi, double logdet, double rel, Index inner, bool conv) {
    return MMRecord{iter, nll_from_scm(xi * (s / md), data.scm), logdet + log_s, rel, inner, conv};
  };

  Estimate out{x, {}};
  MMTrace& trace = out.trace;
  double logdet = logdet_pd(x);
  trace.records.push_back(record(0, x, logdet, 0.0, 0, true));

  Atom1State admm_state;
  DykstraState dykstra_state;
  trace.stop = StopReason::MaxIterations;
  for (Index t = 1; t <= cfg.outer_max_iter; ++t) {
    InnerResult inner = cfg.inner_mode == InnerMode::ADMM ? solve_surrogate_admm(x, work, cfg, &admm_state)
                                                          : solve_surrogate_projection(x, work, spec, cfg, &dykstra_state);
    if (!inner.converged) trace.inner_warning = true;
    if (inner.ordering_violated) ++trace.ordering_violations;

    HermitianMatrix xn = inner.x;
    const double lmin = min_eigenvalue(xn);
    if (!(lmin > 0.0)) {
      ++trace.pd_loads;
      xn += HermitianMatrix::identity(m) * (-lmin + 1e-10 * std::abs(xn.trace()) / md);
    }
    xn *= constraint_value(xn, work.scm);
    const double ld = logdet_pd(xn);
    if (ld > logdet) {
      trace.stop = StopReason::NoDescent;
      trace.rejected_increase = ld - logdet;
      break;
    }
    const double rel = (xn.matrix() - x.matrix()).norm() / x.frobenius_norm();
    x = xn;
    logdet = ld;
    trace.records.push_back(record(t, x, logdet, rel, inner.iterations, inner.converged));
    if (rel <= cfg.outer_tol) {
      trace.stop = StopReason::Converged;
      break;
    }
  }
  out.r = x * (s / md);
  return out;
}

HermitianMatrix scm_estimate(const DataSet& data) { return data.scm; }

}  // namespace tcov
