#include "tcov/crlb.hpp"

#include <ostream>

#include "tcov/matrix_io.hpp"

namespace tcov {

namespace {

constexpr Complex kJ(0.0, 1.0);

// Hermitian Toeplitz derivative basis of size l restricted to lags <= band:
// identity, then the real and imaginary parts of each lag.
std::vector<Matrix> toeplitz_basis(Index l, Index band) {
  std::vector<Matrix> out;
  out.push_back(Matrix::Identity(l, l));
  for (Index g = 1; g <= band; ++g) {
    Matrix d = Matrix::Zero(l, l);
    for (Index i = 0; i + g < l; ++i) d(i, i + g) = d(i + g, i) = 1.0;
    out.push_back(d);
  }
  for (Index g = 1; g <= band; ++g) {
    Matrix d = Matrix::Zero(l, l);
    for (Index i = 0; i + g < l; ++i) {
      d(i, i + g) = kJ;
      d(i + g, i) = -kJ;
    }
    out.push_back(d);
  }
  return out;
}

void require_linear(const StructureSpec& spec, Index m) {
  if (!spec.is_linear()) {
    throw ValidationError("no CRLB parametrization for structure '" + spec.to_string() + "'");
  }
  spec.validate(m);
}

}  // namespace

Index theta_size(const StructureSpec& spec, Index m) {
  require_linear(spec, m);
  switch (spec.kind) {
    case StructureKind::BandedToeplitz:
      return 2 * spec.bandwidth + 1;
    case StructureKind::TBT:
      return (2 * spec.block_size - 1) * spec.blocks;
    default:
      return 2 * m - 1;
  }
}

Index ThetaParam::size() const { return theta_size(structure, dim); }

std::vector<HermitianMatrix> build_derivatives(const StructureSpec& spec, Index m) {
  require_linear(spec, m);
  std::vector<HermitianMatrix> out;
  if (spec.kind == StructureKind::TBT) {
    const Index p = spec.blocks;
    const Index l = spec.block_size;
    const auto inner = toeplitz_basis(l, l - 1);
    for (Index z = 0; z < p; ++z) {
      // S_0 = I, S_z = C_z + C_z^T with C_z the z-th block superdiagonal.
      RealMatrix sz = RealMatrix::Zero(p, p);
      for (Index u = 0; u + z < p; ++u) sz(u, u + z) = sz(u + z, u) = 1.0;
      for (const Matrix& d : inner) {
        Matrix k = Matrix::Zero(m, m);
        for (Index u = 0; u < p; ++u) {
          for (Index v = 0; v < p; ++v) {
            if (sz(u, v) != 0.0) k.block(u * l, v * l, l, l) = d;
          }
        }
        out.push_back(HermitianMatrix::hermitian_part(k));
      }
    }
    return out;
  }
  const Index band = spec.kind == StructureKind::BandedToeplitz ? spec.bandwidth : m - 1;
  for (const Matrix& d : toeplitz_basis(m, band)) out.push_back(HermitianMatrix::hermitian_part(d));
  return out;
}

std::vector<HermitianMatrix> build_derivatives(const ThetaParam& p) { return build_derivatives(p.structure, p.dim); }

HermitianMatrix covariance_from_theta(const StructureSpec& spec, Index m, const RealVector& theta) {
  const auto ds = build_derivatives(spec, m);
  if (theta.size() != static_cast<Index>(ds.size())) {
    throw ValidationError("theta has length " + std::to_string(theta.size()) + ", expected " +
                          std::to_string(ds.size()));
  }
  Matrix r = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < ds.size(); ++i) r += theta(static_cast<Index>(i)) * ds[i].matrix();
  return HermitianMatrix::hermitian_part(r);
}

RealVector theta_from_covariance(const StructureSpec& spec, const HermitianMatrix& r) {
  const Index m = r.dim();
  require_linear(spec, m);
  RealVector theta(theta_size(spec, m));
  auto fill = [&](Index offset, Index col0, Index band) {
    theta(offset) = r(0, col0).real();
    for (Index g = 1; g <= band; ++g) {
      theta(offset + g) = r(0, col0 + g).real();
      theta(offset + band + g) = r(0, col0 + g).imag();
    }
  };
  switch (spec.kind) {
    case StructureKind::TBT: {
      const Index l = spec.block_size;
      for (Index z = 0; z < spec.blocks; ++z) fill(z * (2 * l - 1), z * l, l - 1);
      break;
    }
    case StructureKind::BandedToeplitz:
      fill(0, 0, spec.bandwidth);
      break;
    default:
      fill(0, 0, m - 1);
      break;
  }
  return theta;
}

RealMatrix fisher_information(const ThetaParam& p, const HermitianMatrix& r) {
  if (r.dim() != p.dim) throw ValidationError("fisher_information: dimension mismatch");
  if (!(p.n > 0.0)) throw ValidationError("fisher_information: sample count must be positive");
  Eigen::LLT<Matrix> llt(r.matrix());
  if (llt.info() != Eigen::Success) throw ValidationError("fisher_information: covariance is not positive definite");
  const auto ds = build_derivatives(p);
  const auto q = static_cast<Index>(ds.size());
  std::vector<Matrix> a(ds.size());
  for (Index i = 0; i < q; ++i) a[i] = llt.solve(ds[i].matrix());
  RealMatrix f(q, q);
  for (Index i = 0; i < q; ++i) {
    for (Index k = i; k < q; ++k) {
      // Tr(A_i A_k) = Σ_{u,v} A_i(u,v) A_k(v,u)
      const double v = p.n * a[i].cwiseProduct(a[k].transpose()).sum().real();
      f(i, k) = f(k, i) = v;
    }
  }
  return f;
}

std::vector<Index> coefficient_theta_indices(const StructureSpec& spec, Index m, Index i) {
  require_linear(spec, m);
  if (i < 0 || i >= m) throw ValidationError("coefficient index out of range");
  switch (spec.kind) {
    case StructureKind::TBT: {
      const Index l = spec.block_size;
      const Index z = i / l;
      const Index g = i - z * l;  // position inside the block's first row
      const Index base = z * (2 * l - 1);
      if (g == 0) return {base};
      return {base + g, base + (l - 1) + g};
    }
    case StructureKind::BandedToeplitz: {
      const Index b = spec.bandwidth;
      if (i == 0) return {0};
      if (i > b) return {};
      return {i, i + b};
    }
    default:
      if (i == 0) return {0};
      return {i, i + m - 1};
  }
}

CrlbReport crlb_report(const ThetaParam& p, const HermitianMatrix& r) {
  CrlbReport out;
  out.fim = fisher_information(p, r);
  const Eigen::LDLT<RealMatrix> ldlt(out.fim);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(out.fim, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().maxCoeff();
  const Index deficient = (es.eigenvalues().array() <= 1e-12 * std::max(emax, 0.0)).count();
  if (deficient > 0 || ldlt.info() != Eigen::Success) {
    throw ValidationError("Fisher information is singular (rank deficiency " + std::to_string(deficient) + " of " +
                          std::to_string(out.fim.rows()) + ")");
  }
  RealMatrix inv = ldlt.solve(RealMatrix::Identity(out.fim.rows(), out.fim.cols()));
  inv = 0.5 * (inv + inv.transpose()).eval();
  out.bounds = RealVector::Zero(p.dim);
  for (Index i = 0; i < p.dim; ++i) {
    for (const Index k : coefficient_theta_indices(p.structure, p.dim, i)) out.bounds(i) += inv(k, k);
  }
  out.sum_bound = out.bounds.sum();
  out.mean_bound = out.sum_bound / static_cast<double>(p.dim);
  return out;
}

void write_crlb_csv(std::ostream& os, const CrlbReport& report) {
  os << "coeff_index,bound\n";
  for (Index i = 0; i < report.bounds.size(); ++i) os << i + 1 << ',' << format_double(report.bounds(i)) << '\n';
  os << "sum_bound," << format_double(report.sum_bound) << '\n';
}

}  // namespace tcov
