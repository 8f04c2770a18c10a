#ifndef TCOV_SCENARIOS_HPP
#define TCOV_SCENARIOS_HPP

#include <cstdint>
#include <vector>

#include "tcov/dataset.hpp"
#include "tcov/hermitian.hpp"
#include "tcov/structure.hpp"

namespace tcov {

enum class SincConvention {
  Unnormalized,  // sin(x)/x
  Normalized     // sin(πx)/(πx)
};

struct Jammer {
  double power = 1.0;      // linear
  double angle_deg = 0.0;  // |θ| < 90
};

/// Uniform linear array with half-wavelength spacing, jammers and white noise.
struct RadarScenario {
  Index m = 1;
  std::vector<Jammer> jammers;
  double fractional_bandwidth = 0.0;
  double noise_power = 1.0;  // linear
  SincConvention sinc = SincConvention::Unnormalized;

  void validate() const;
};

enum class TruthKind { Frequencies, RandomStructured, Jammer };

struct GroundTruthSpec {
  TruthKind kind = TruthKind::Frequencies;
  Index m = 1;
  RealVector frequencies;  // rad, Frequencies
  RealVector powers;       // linear, Frequencies
  StructureSpec structure; // RandomStructured
  std::uint64_t seed = 0;  // RandomStructured
  RadarScenario radar;     // Jammer
};

/// Σ p_i a(ω_i) a(ω_i)^H with a(ω) = [1, e^{jω}, ..., e^{j(m-1)ω}]^T.
HermitianMatrix toeplitz_from_frequencies(Index m, const RealVector& frequencies, const RealVector& powers);

/**
 * Seeded random PSD matrix of a banded or TBT structure, obtained by
 * alternating structure and PSD projections from a random Wishart-type
 * start. A 1e-6·Tr/m diagonal load is added when the result is singular.
 */
HermitianMatrix random_structured_truth(const StructureSpec& structure, Index m, std::uint64_t seed);

HermitianMatrix make_truth(const GroundTruthSpec& spec);

/// [1, e^{jπ sin θ}, ..., e^{jπ(m-1) sin θ}]^T.
Vector steering_vector(Index m, double theta_deg);

HermitianMatrix jammer_covariance(const RadarScenario& scenario);

/**
 * y_k = R^{1/2} n_k with n_k circular Gaussian, E[n n^H] = I.
 * Draws are taken snapshot by snapshot, so the first n' < n columns do not
 * depend on n.
 */
Matrix draw_snapshots(const HermitianMatrix& r, Index n, std::uint64_t seed);

DataSet sample_dataset(const HermitianMatrix& r, Index n, std::uint64_t seed);

/// Mean over estimates of (1/m) Σ_i |r_i - r̂_i|² on the first rows.
double mse_first_row(const HermitianMatrix& truth, const std::vector<HermitianMatrix>& estimates);

struct SinrResult {
  double avg_sinr = 0.0;
  double bound = 0.0;
  Index used = 0;
  Index excluded = 0;  // singular estimates
};

/// Averages |w^H s|²/(w^H R w) with w = R̂^{-1} s; bound s^H R^{-1} s.
SinrResult sinr_avg_and_bound(const HermitianMatrix& truth, const std::vector<HermitianMatrix>& estimates,
                              double theta_deg);

}  // namespace tcov

#endif  // TCOV_SCENARIOS_HPP
