#include "tcov/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "tcov/projections.hpp"

namespace tcov {

namespace {

double sinc(double x, SincConvention c) {
  if (c == SincConvention::Normalized) x *= std::numbers::pi;
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(x) / x;
}

}  // namespace

void RadarScenario::validate() const {
  if (m < 1) throw ValidationError("scenario: m must be at least 1");
  if (!(fractional_bandwidth >= 0.0)) throw ValidationError("scenario: fractional bandwidth must be >= 0");
  if (!(noise_power > 0.0)) throw ValidationError("scenario: noise power must be positive");
  for (const auto& j : jammers) {
    if (!(j.power > 0.0)) throw ValidationError("scenario: jammer power must be positive");
    if (!(std::abs(j.angle_deg) < 90.0)) throw ValidationError("scenario: jammer angle must satisfy |θ| < 90");
  }
}

HermitianMatrix toeplitz_from_frequencies(Index m, const RealVector& frequencies, const RealVector& powers) {
  if (m < 1) throw ValidationError("toeplitz_from_frequencies: m must be at least 1");
  if (frequencies.size() != powers.size()) {
    throw ValidationError("toeplitz_from_frequencies: frequencies and powers differ in length");
  }
  if (frequencies.size() == 0) throw ValidationError("toeplitz_from_frequencies: no frequencies given");
  if (frequencies.size() > m) throw ValidationError("toeplitz_from_frequencies: more frequencies than m");
  for (Index i = 0; i < frequencies.size(); ++i) {
    if (!(powers(i) > 0.0)) throw ValidationError("toeplitz_from_frequencies: powers must be positive");
    for (Index k = 0; k < i; ++k) {
      if (frequencies(i) == frequencies(k)) throw ValidationError("toeplitz_from_frequencies: duplicate frequency");
    }
  }
  // Built from the first row so the result is exactly Toeplitz.
  Vector row = Vector::Zero(m);
  for (Index i = 0; i < frequencies.size(); ++i) {
    for (Index g = 0; g < m; ++g) row(g) += powers(i) * std::polar(1.0, -frequencies(i) * static_cast<double>(g));
  }
  return toeplitz_from_first_row(row);
}

HermitianMatrix random_structured_truth(const StructureSpec& structure, Index m, std::uint64_t seed) {
  if (structure.kind != StructureKind::BandedToeplitz && structure.kind != StructureKind::TBT) {
    throw ValidationError("random_structured_truth: structure must be banded or TBT");
  }
  structure.validate(m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Matrix g(m, m);
  for (Index k = 0; k < g.size(); ++k) g(k) = Complex(normal(rng), normal(rng));
  HermitianMatrix z = HermitianMatrix::hermitian_part(g * g.adjoint() / static_cast<double>(m));
  for (int it = 0; it < 100000; ++it) {
    const HermitianMatrix next = project_psd_cone(project_structure(z, structure));
    const double change = (next.matrix() - z.matrix()).norm();
    z = next;
    if (change <= 1e-10 * z.frobenius_norm()) break;
  }
  z = project_structure(z, structure);
  const double lmin = min_eigenvalue(z);
  const double load = 1e-6 * z.trace() / static_cast<double>(m);
  if (lmin < load) z += HermitianMatrix::identity(m) * (std::max(0.0, -lmin) + load);
  return z;
}

HermitianMatrix make_truth(const GroundTruthSpec& spec) {
  switch (spec.kind) {
    case TruthKind::Frequencies:
      return toeplitz_from_frequencies(spec.m, spec.frequencies, spec.powers);
    case TruthKind::RandomStructured:
      return random_structured_truth(spec.structure, spec.m, spec.seed);
    case TruthKind::Jammer:
      return jammer_covariance(spec.radar);
  }
  throw ValidationError("make_truth: unknown kind");
}

Vector steering_vector(Index m, double theta_deg) {
  if (m < 1) throw ValidationError("steering_vector: m must be at least 1");
  if (!(std::abs(theta_deg) < 90.0)) throw ValidationError("steering_vector: angle must satisfy |θ| < 90");
  const double phi = std::numbers::pi * std::sin(theta_deg * std::numbers::pi / 180.0);
  Vector s(m);
  for (Index k = 0; k < m; ++k) s(k) = std::polar(1.0, phi * static_cast<double>(k));
  return s;
}

HermitianMatrix jammer_covariance(const RadarScenario& sc) {
  sc.validate();
  const Index m = sc.m;
  Matrix r = Matrix::Zero(m, m);
  for (const auto& j : sc.jammers) {
    const double phi = std::numbers::pi * std::sin(j.angle_deg * std::numbers::pi / 180.0);
    for (Index p = 0; p < m; ++p) {
      for (Index q = 0; q < m; ++q) {
        const auto d = static_cast<double>(p - q);
        r(p, q) += j.power * sinc(0.5 * sc.fractional_bandwidth * d * phi, sc.sinc) * std::polar(1.0, d * phi);
      }
    }
  }
  r.diagonal().array() += sc.noise_power;
  return HermitianMatrix::hermitian_part(r);
}

Matrix draw_snapshots(const HermitianMatrix& r, Index n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("draw_snapshots: n must be at least 1");
  const Index m = r.dim();
  const HermitianMatrix root = psd_sqrt(r);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Matrix w(m, n);
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0; i < m; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      w(i, k) = Complex(re, im);
    }
  }
  return root.matrix() * w;
}

DataSet sample_dataset(const HermitianMatrix& r, Index n, std::uint64_t seed) {
  return build_dataset(draw_snapshots(r, n, seed));
}

double mse_first_row(const HermitianMatrix& truth, const std::vector<HermitianMatrix>& estimates) {
  if (estimates.empty()) throw ValidationError("mse_first_row: no estimates");
  const Index m = truth.dim();
  double acc = 0.0;
  for (const auto& e : estimates) {
    if (e.dim() != m) throw ValidationError("mse_first_row: dimension mismatch");
    acc += (e.matrix().row(0) - truth.matrix().row(0)).squaredNorm() / static_cast<double>(m);
  }
  return acc / static_cast<double>(estimates.size());
}

SinrResult sinr_avg_and_bound(const HermitianMatrix& truth, const std::vector<HermitianMatrix>& estimates,
                              double theta_deg) {
  const Index m = truth.dim();
  const Vector s = steering_vector(m, theta_deg);
  Eigen::LLT<Matrix> llt(truth.matrix());
  if (llt.info() != Eigen::Success) throw ValidationError("sinr_avg_and_bound: truth is not positive definite");
  SinrResult out;
  out.bound = s.dot(llt.solve(s)).real();
  double acc = 0.0;
  for (const auto& e : estimates) {
    if (e.dim() != m) throw ValidationError("sinr_avg_and_bound: dimension mismatch");
    Eigen::LLT<Matrix> le(e.matrix());
    if (le.info() != Eigen::Success) {
      ++out.excluded;
      continue;
    }
    const Vector w = le.solve(s);
    const double num = std::norm(w.dot(s));
    const double den = w.dot(truth.matrix() * w).real();
    acc += num / den;
    ++out.used;
  }
  if (out.used == 0) throw ValidationError("sinr_avg_and_bound: no usable estimate");
  out.avg_sinr = acc / static_cast<double>(out.used);
  return out;
}

}  // namespace tcov
