#ifndef TCOV_EXPERIMENT_HPP
#define TCOV_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcov/estimators.hpp"
#include "tcov/result_table.hpp"
#include "tcov/scenarios.hpp"
#include "tcov/structure.hpp"

namespace tcov {

enum class ExperimentKind { Convergence, MseVsN, Sinr, CrlbTable, Runtime };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

enum class EstimatorName { Atom1, Atom2, Atom2Pocs, Scm };

std::string to_string(EstimatorName name);

struct EstimatorSpec {
  EstimatorName name = EstimatorName::Atom2;
  StructureSpec structure;
  std::string label;  // column name; defaults to the estimator name
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Convergence;
  std::optional<GroundTruthSpec> truth;  // runtime draws its own truths
  std::vector<EstimatorSpec> estimators;
  std::vector<Index> n_grid;
  Index trials = 1;
  std::uint64_t seed = 0;
  EstimatorConfig solver;
  StructureSpec crlb_structure;     // mse_vs_n, crlb_table
  std::vector<double> look_angles;  // sinr, degrees
  std::vector<Index> m_grid;        // runtime
  Index threads = 1;
  std::string output;

  /// Throws ValidationError naming the offending key.
  void validate() const;
};

/// Parses and validates a JSON config. Unknown keys are errors.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical one-line JSON form; parse_config(config_to_json(c)) reproduces c.
std::string config_to_json(const ExperimentConfig& cfg);

/// Estimator config with the inner mode implied by the estimator name.
EstimatorConfig solver_for(const EstimatorSpec& est, const EstimatorConfig& base);

/// Runs one estimator on one data set.
Estimate run_estimator(const EstimatorSpec& est, const DataSet& data, const EstimatorConfig& base);

/**
 * Columns per kind:
 *   convergence  estimator, iter, nll, logdet_x
 *   mse_vs_n     n, <label>..., crlb_sum, crlb_mean
 *   sinr         n, theta_deg, <label>..., bound
 *   crlb_table   coeff_index, bound (footer rows sum_bound, mean_bound)
 *   runtime      m, estimator, mean_seconds, mean_outer_iters
 *
 * Trial k uses seed + k. Rows come out in trial order whatever the thread
 * count, so the table depends only on the config.
 */
ResultTable run_experiment(const ExperimentConfig& cfg);

const char* version_string();

}  // namespace tcov

#endif  // TCOV_EXPERIMENT_HPP
