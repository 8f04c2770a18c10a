#include "tcov/projections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <lapacke.h>

namespace tcov {

namespace {

// Hermitian-consistent diagonal means of a square matrix: c_g pools diagonal g
// with the conjugate of diagonal -g.
Vector hermitian_diagonal_means(const Matrix& a) {
  const Index m = a.rows();
  Vector c(m);
  for (Index g = 0; g < m; ++g) {
    Complex s(0.0, 0.0);
    for (Index i = 0; i + g < m; ++i) s += a(i, i + g) + std::conj(a(i + g, i));
    c(g) = s / static_cast<double>(2 * (m - g));
  }
  c(0) = c(0).real();
  return c;
}

Matrix toeplitz_matrix(const Vector& c) {
  const Index m = c.size();
  Matrix t(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index k = 0; k < m; ++k) t(i, k) = k >= i ? c(k - i) : std::conj(c(i - k));
  }
  return t;
}

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw ValidationError(std::string(what) + ": matrix must be square and non-empty");
  }
}

}  // namespace

RowVectorXc toeplitz_first_row(const HermitianMatrix& a) { return a.matrix().row(0); }

HermitianMatrix toeplitz_from_first_row(const Eigen::Ref<const Vector>& row) {
  if (row.size() < 1) throw ValidationError("toeplitz_from_first_row: empty row");
  Vector c = row;
  c(0) = c(0).real();
  return HermitianMatrix::hermitian_part(toeplitz_matrix(c));
}

HermitianMatrix project_structure(const Matrix& a, const StructureSpec& spec) {
  require_square(a, "project_structure");
  const Index m = a.rows();
  if (!spec.is_linear()) {
    throw ValidationError("project_structure: '" + spec.to_string() + "' is not a linear structure");
  }
  spec.validate(m);
  switch (spec.kind) {
    case StructureKind::Toeplitz:
      return HermitianMatrix::hermitian_part(toeplitz_matrix(hermitian_diagonal_means(a)));
    case StructureKind::BandedToeplitz: {
      Vector c = hermitian_diagonal_means(a);
      c.tail(m - 1 - spec.bandwidth).setZero();
      return HermitianMatrix::hermitian_part(toeplitz_matrix(c));
    }
    case StructureKind::TBT: {
      const Index p = spec.blocks;
      const Index l = spec.block_size;
      Matrix out(m, m);
      for (Index w = 0; w < p; ++w) {
        Matrix acc = Matrix::Zero(l, l);
        Index count = 0;
        for (Index u = 0; u + w < p; ++u) {
          acc += a.block(u * l, (u + w) * l, l, l);
          ++count;
          if (w > 0) {
            acc += a.block((u + w) * l, u * l, l, l);
            ++count;
          }
        }
        acc /= static_cast<double>(count);
        const Matrix rw = toeplitz_matrix(hermitian_diagonal_means(acc));
        for (Index u = 0; u + w < p; ++u) {
          out.block(u * l, (u + w) * l, l, l) = rw;
          out.block((u + w) * l, u * l, l, l) = rw;
        }
      }
      return HermitianMatrix::hermitian_part(out);
    }
    default:
      break;
  }
  throw ValidationError("project_structure: unsupported structure");
}

HermitianMatrix project_structure(const HermitianMatrix& a, const StructureSpec& spec) {
  return project_structure(a.matrix(), spec);
}

Matrix average_diagonal_blocks(const Matrix& a, Index blocks) {
  require_square(a, "average_diagonal_blocks");
  if (blocks < 1 || a.rows() % blocks != 0) {
    throw ValidationError("average_diagonal_blocks: dimension " + std::to_string(a.rows()) +
                          " is not divisible into " + std::to_string(blocks) + " blocks");
  }
  const Index m = a.rows() / blocks;
  Matrix acc = Matrix::Zero(m, m);
  for (Index i = 0; i < blocks; ++i) acc += a.block(i * m, i * m, m, m);
  return acc / static_cast<double>(blocks);
}

HermitianMatrix block_repeat(const HermitianMatrix& b, Index blocks) {
  if (blocks < 1) throw ValidationError("block_repeat: block count must be at least 1");
  const Index m = b.dim();
  Matrix out = Matrix::Zero(m * blocks, m * blocks);
  for (Index i = 0; i < blocks; ++i) out.block(i * m, i * m, m, m) = b.matrix();
  return HermitianMatrix::hermitian_part(out);
}

HermitianMatrix project_block_repeated(const HermitianMatrix& a, const StructureSpec& inner_spec) {
  const Index big = a.dim();
  const auto m = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(big))));
  if (m * m != big) {
    throw ValidationError("project_block_repeated: dimension " + std::to_string(big) + " is not a square number");
  }
  return block_repeat(project_structure(average_diagonal_blocks(a.matrix(), m), inner_spec.linear_part()), m);
}

HermitianMatrix project_psd_cone(const HermitianMatrix& a) {
  const Index n = a.dim();
  const Eigen::Tridiagonalization<Matrix> tri(a.matrix());
  RealVector d = tri.diagonal();
  RealVector e = tri.subDiagonal();

  // Sturm count of the negative eigenvalues.
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, e.size() > 0 ? e.squaredNorm() : 0.0);
  Index negatives = 0;
  double q = 1.0;
  for (Index i = 0; i < n; ++i) {
    q = d(i) - (i > 0 ? e(i - 1) * e(i - 1) / q : 0.0);
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++negatives;
  }
  if (negatives == 0) return a;
  if (negatives == n) return HermitianMatrix::zero(n);

  // Few eigenvalues on one side of zero: bisection plus inverse iteration for
  // that side only. A = V+Λ+V+^H + V-Λ-V-^H, so either part gives the other.
  const bool use_negative = negatives <= n - negatives;
  const Index side = use_negative ? negatives : n - negatives;
  if (side <= std::max<Index>(1, n / 8)) {
    const double bound = 2.0 * (d.cwiseAbs().maxCoeff() + 2.0 * (e.size() > 0 ? e.cwiseAbs().maxCoeff() : 0.0)) + 1.0;
    RealVector w(n);
    Eigen::Matrix<lapack_int, Eigen::Dynamic, 1> iblock(n), isplit(n);
    lapack_int found = 0, nsplit = 0;
    lapack_int info = LAPACKE_dstebz('V', 'B', static_cast<lapack_int>(n), use_negative ? -bound : 0.0,
                                     use_negative ? 0.0 : bound, 0, 0, 0.0, d.data(), e.data(), &found, &nsplit,
                                     w.data(), iblock.data(), isplit.data());
    if (info == 0 && found > 0) {
      RealMatrix z(n, found);
      Eigen::Matrix<lapack_int, Eigen::Dynamic, 1> ifail(found);
      info = LAPACKE_dstein(LAPACK_COL_MAJOR, static_cast<lapack_int>(n), d.data(), e.data(), found, w.data(),
                            iblock.data(), isplit.data(), z.data(), static_cast<lapack_int>(n), ifail.data());
      if (info == 0) {
        const Matrix v = tri.matrixQ() * z.cast<Complex>();
        const Matrix part = v * w.head(found).cast<Complex>().asDiagonal() * v.adjoint();
        return HermitianMatrix::hermitian_part(use_negative ? Matrix(a.matrix() - part) : part);
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<RealMatrix> es;
  es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  const RealVector lambda = es.eigenvalues();
  Index first = 0;
  while (first < n && lambda(first) <= 0.0) ++first;
  if (first == n) return HermitianMatrix::zero(n);
  const Matrix v = tri.matrixQ() * es.eigenvectors().rightCols(n - first).cast<Complex>();
  return HermitianMatrix::hermitian_part(v * lambda.tail(n - first).cast<Complex>().asDiagonal() * v.adjoint());
}

HermitianMatrix project_lmi(const HermitianMatrix& a, const HermitianMatrix& lower) {
  if (a.dim() != lower.dim()) throw ValidationError("project_lmi: dimension mismatch");
  return project_psd_cone(a - lower) + lower;
}

double solve_waterlevel(const RealVector& gamma, double kappa) {
  if (gamma.size() == 0) throw ValidationError("solve_waterlevel: empty spectrum");
  if (!(kappa >= 1.0)) throw ValidationError("solve_waterlevel: kappa must be >= 1");
  if (gamma.maxCoeff() <= 0.0) return 0.0;

  std::vector<double> breaks{0.0};
  for (const double g : gamma) {
    if (g > 0.0) {
      breaks.push_back(g);
      breaks.push_back(g / kappa);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto cost = [&](double u) {
    double h = 0.0;
    for (const double g : gamma) {
      const double d = std::clamp(g, u, kappa * u) - g;
      h += d * d;
    }
    return h;
  };

  double best_u = 0.0;
  double best_h = std::numeric_limits<double>::infinity();
  const double scale = gamma.squaredNorm();
  for (std::size_t s = 0; s < breaks.size(); ++s) {
    const double lo = breaks[s];
    const bool last = s + 1 == breaks.size();
    const double hi = last ? std::numeric_limits<double>::infinity() : breaks[s + 1];
    // Classify the spectrum at an interior point of the piece.
    const double probe = last ? lo * 2.0 + 1.0 : 0.5 * (lo + hi);
    double num = 0.0;
    double den = 0.0;
    for (const double g : gamma) {
      if (g < probe) {
        num += g;
        den += 1.0;
      } else if (g > kappa * probe) {
        num += kappa * g;
        den += kappa * kappa;
      }
    }
    const double u = den > 0.0 ? std::clamp(num / den, lo, hi) : lo;
    const double h = cost(u);
    if (h < best_h - 1e-14 * scale) {
      best_h = h;
      best_u = u;
    }
  }
  return best_u;
}

HermitianMatrix project_cond_number(const HermitianMatrix& a, double kappa) {
  const EigenDecomposition evd = hermitian_evd(a);
  const double u = solve_waterlevel(evd.eigenvalues, kappa);
  const RealVector lambda = evd.eigenvalues.unaryExpr([&](double g) { return std::clamp(g, u, kappa * u); });
  return HermitianMatrix::hermitian_part(evd.eigenvectors * lambda.cast<Complex>().asDiagonal() *
                                         evd.eigenvectors.adjoint());
}

LowRankProjection project_lowrank_plus_scalar(const HermitianMatrix& a, Index r) {
  const Index m = a.dim();
  if (r < 1 || r >= m) {
    throw ValidationError("project_lowrank_plus_scalar: rank must lie in [1, m-1], got " + std::to_string(r));
  }
  const EigenDecomposition evd = hermitian_evd(a);
  const double sigma = std::max(0.0, evd.eigenvalues.tail(m - r).mean());
  RealVector lambda = evd.eigenvalues;
  lambda.tail(m - r).setConstant(sigma);
  LowRankProjection out{HermitianMatrix::hermitian_part(evd.eigenvectors * lambda.cast<Complex>().asDiagonal() *
                                                        evd.eigenvectors.adjoint()),
                        sigma, sigma > evd.eigenvalues(r - 1)};
  return out;
}

HermitianMatrix project_blockwise(const HermitianMatrix& a, Index m,
                                  const std::function<HermitianMatrix(const HermitianMatrix&)>& project) {
  if (m < 1 || a.dim() % m != 0) throw ValidationError("project_blockwise: block size does not divide dimension");
  Matrix out = a.matrix();
  for (Index i = 0; i < a.dim() / m; ++i) {
    const auto blk = HermitianMatrix::hermitian_part(a.matrix().block(i * m, i * m, m, m));
    out.block(i * m, i * m, m, m) = project(blk).matrix();
  }
  return HermitianMatrix::hermitian_part(out);
}

IntersectionResult project_intersection(const HermitianMatrix& init, const std::vector<ProjectionSet>& sets,
                                        const IntersectionOptions& options, DykstraState* state) {
  if (sets.empty()) throw ValidationError("project_intersection: no sets given");
  if (options.max_iter < 1) throw ValidationError("project_intersection: max_iter must be >= 1");
  if (!(options.tol > 0.0)) throw ValidationError("project_intersection: tol must be positive");
  const bool dykstra = options.mode == IntersectionMode::Dykstra;
  if (dykstra) {
    for (const auto& s : sets) {
      if (!s.convex) {
        throw ValidationError("project_intersection: set '" + s.name + "' is not convex; use POCS mode");
      }
    }
  }

  HermitianMatrix t = init;
  std::vector<HermitianMatrix> corr;
  if (dykstra) {
    const bool warm = state != nullptr && state->corrections.size() == sets.size() &&
                      state->corrections.front().dim() == init.dim();
    if (warm) {
      corr = state->corrections;
      for (const auto& c : corr) t -= c;
    } else {
      corr.assign(sets.size(), HermitianMatrix::zero(init.dim()));
    }
  }

  IntersectionResult result{t, 0, false};
  for (Index it = 1; it <= options.max_iter; ++it) {
    const HermitianMatrix prev = t;
    for (std::size_t k = 0; k < sets.size(); ++k) {
      if (dykstra) {
        const HermitianMatrix shifted = t + corr[k];
        t = sets[k].project(shifted);
        corr[k] = shifted - t;
      } else {
        t = sets[k].project(t);
      }
    }
    result.iterations = it;
    const double change = (t.matrix() - prev.matrix()).norm();
    if (change <= options.tol * std::max(prev.frobenius_norm(), std::numeric_limits<double>::min())) {
      result.converged = true;
      break;
    }
  }
  result.point = t;
  if (dykstra && state != nullptr) {
    state->corrections = std::move(corr);
    state->iterations += result.iterations;
  }
  return result;
}

}  // namespace tcov
