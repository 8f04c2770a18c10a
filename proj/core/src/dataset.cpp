#include "tcov/dataset.hpp"

#include <cmath>

namespace tcov {

HermitianMatrix DataSet::reduced_constraint() const {
  return HermitianMatrix::hermitian_part(reduced_vector * reduced_vector.adjoint());
}

DataSet build_dataset(const Matrix& samples) {
  if (samples.rows() < 1) throw ValidationError("build_dataset: dimension must be at least 1");
  if (samples.cols() < 1) throw ValidationError("build_dataset: need at least one sample");
  if (!samples.allFinite()) throw ValidationError("build_dataset: samples contain non-finite values");
  DataSet d;
  d.samples = samples;
  d.scm = HermitianMatrix::hermitian_part(samples * samples.adjoint() / static_cast<double>(samples.cols()));
  d.factor = cholesky_or_sqrt_factor(d.scm);
  d.reduced_vector = d.factor.reshaped();
  return d;
}

DataSet rescaled(const DataSet& data, double s) {
  if (!(s > 0.0)) throw ValidationError("rescaled: scale must be positive");
  DataSet d;
  const double f = 1.0 / std::sqrt(s);
  d.samples = data.samples * f;
  d.scm = data.scm * (1.0 / s);
  d.factor = data.factor * f;
  d.reduced_vector = data.reduced_vector * f;
  return d;
}

}  // namespace tcov
