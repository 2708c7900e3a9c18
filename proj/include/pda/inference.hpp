#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pda/relax.hpp"
#include "pda/tighten.hpp"
#include "pda/types.hpp"

namespace pda {

/// Tightening options for the pipeline; the sparsity level k is derived per
/// fit from the relaxed solution (entries above support_epsilon in
/// magnitude), or forced via k_override. With lambda = 0, k = d.
struct TightenOptions {
  double step0 = 0.5;
  int max_iter = 5000;
  double tol = 1e-9;
  double support_epsilon = 1e-6;
  std::optional<std::size_t> k_override;
};

struct CvConfig {
  std::vector<double> grid;
  int folds = 5;
};

struct PipelineConfig {
  RelaxConfig relax;
  TightenOptions tighten;
  std::optional<CvConfig> cv;  // when set, lambda is re-selected by CV
};

struct AnalysisResult {
  ProjectionVector beta;
  double divergence;        // objective(X, Y, beta) at output time
  std::size_t k_effective;  // nonzero count of the returned beta
  double lambda_used;
  RelaxTrace solver_trace;
};

/// Relax, derive k, tighten from the relaxed direction, and return the
/// better of the two iterates by objective.
AnalysisResult pda_analyze(const SampleSet& x, const SampleSet& y,
                           const RelaxConfig& relax_cfg, const TightenOptions& opts);

/// Full pipeline under a PipelineConfig: optional lambda re-selection by
/// cross-validation, then pda_analyze. run_seed feeds the CV fold shuffles.
AnalysisResult analyze_with_config(const SampleSet& x, const SampleSet& y,
                                   const PipelineConfig& cfg, std::uint64_t run_seed);

struct CvRow {
  double lambda;
  std::vector<double> fold_divergences;
  double mean_divergence;
};

struct CvResult {
  double lambda_star;
  std::vector<CvRow> table;
};

/// For every lambda in the grid and every fold, fit on the training split of
/// both groups and evaluate the fitted direction's divergence on the held-out
/// split. lambda_star maximizes the mean held-out divergence; ties go to the
/// smaller lambda. Folds are seed-derived permutation chunks per group.
CvResult cross_validate_lambda(const SampleSet& x, const SampleSet& y,
                               const PipelineConfig& cfg, std::uint64_t seed);

/// Default grid used when none is given: 8 log-spaced values spanning
/// [1e-4, 1] times the mean pooled per-feature variance.
std::vector<double> default_lambda_grid(const SampleSet& x, const SampleSet& y);

struct PermutationReport {
  double observed_stat;
  std::vector<double> null_stats;  // indexed by permutation
  double p_value;                  // (1 + #{null >= observed}) / (1 + n_perm)
  int n_permutations;
  std::uint64_t seed;
  bool lambda_reselected;  // false = fixed-lambda null
};

/// Pools both groups, refits the full pipeline under size-preserving label
/// reassignments derived from (seed, permutation index), and reports the
/// add-one p-value. Permutations run independently; the report does not
/// depend on scheduling or worker count.
PermutationReport permutation_test(const SampleSet& x, const SampleSet& y,
                                   const PipelineConfig& cfg, int n_perm,
                                   std::uint64_t seed);

}  // namespace pda
