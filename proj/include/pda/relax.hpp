#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pda/kernels.hpp"
#include "pda/types.hpp"

namespace pda {

/// Symmetric d x d iterate of the relaxed problem. Immediately after
/// projection it is PSD with unit trace (small tolerances); the sparsity
/// soft-threshold may perturb both slightly, which is accepted.
struct TraceOneMatrix {
  Matrix entries;
};

/// true iff trace is within trace_tol of 1 and the smallest eigenvalue is
/// above -eig_tol.
bool is_relax_feasible(const Matrix& b, double trace_tol = 1e-8, double eig_tol = 1e-8);

struct DualPair {
  Vector u;
  Vector v;
};

struct RelaxConfig {
  double lambda = 0.0;      // l1 penalty on B
  double gamma = 0.1;       // B step scale (normalized by the gradient norm)
  double eta = 1.0;         // dual step scale, decayed as eta / sqrt(t)
  int patience = 50;        // iterations without improvement before stopping
  int max_iter = 2000;
  int dual_steps_per_b = 5;  // dual subgradient passes per B update
  std::optional<int> incremental_batch;  // sampled pairs per pass when set
  std::uint64_t seed = 0;
  int primal_log_every = 0;  // 0 disables the matching-value diagnostic
};

struct RelaxIterate {
  int iter;
  double dual_value;
  double best_value;
  double primal_proxy;  // NaN unless the diagnostic is enabled for this iter
};

struct RelaxTrace {
  std::vector<RelaxIterate> iterations;
};

struct RelaxState {
  Matrix b;
  DualPair duals;
  int iter = 0;
  std::uint64_t seed = 0;
};

struct RelaxResult {
  TraceOneMatrix b_best;
  ProjectionVector beta;
  double best_dual_value;
  RelaxTrace trace;
};

/// Penalized dual objective at (B, u, v):
///   (1/m) * sum_ij min{0, z_ij^T B z_ij - u_i - v_j}
///   + (1/n) sum_i u_i + (1/m) sum_j v_j - lambda * ||B||_1.
double dual_value(const Matrix& b, const DualPair& duals, const SampleSet& x,
                  const SampleSet& y, double lambda);

/// min over matchings of tr(W_M B). A PSD rank-one B reduces to the sorted
/// univariate distance; otherwise the exact transport LP on the pairwise
/// costs (desk scale only, diagnostics and tests).
double matching_value(const Matrix& b, const SampleSet& x, const SampleSet& y);

/// Euclidean projection onto {w >= 0, sum w = 1}.
Vector simplex_project(std::span<const double> values);

/// Projection onto the PSD unit-trace cone: eigendecompose, project the
/// eigenvalues onto the simplex, reassemble; when lambda > 0 apply the
/// entrywise soft-threshold at delta * lambda afterwards. Feasibility is
/// asserted before the threshold.
TraceOneMatrix project_to_feasible(const Matrix& b, double lambda, double delta);

/// One full iterate: dual_steps_per_b dual subgradient passes (step
/// eta / sqrt(t)), then the projected B update with step gamma normalized by
/// the supergradient norm (skipped when the supergradient is zero). Returns
/// the penalized dual value at the state the step started from.
double supergradient_step(RelaxState& state, const SampleSet& x, const SampleSet& y,
                          const RelaxConfig& cfg);

/// supergradient_step with the full pair sweep replaced by incremental_batch
/// uniformly sampled pairs (with replacement), contributions rescaled by
/// n*m/batch so their expectation matches the full sweep.
double incremental_step(RelaxState& state, const SampleSet& x, const SampleSet& y,
                        const RelaxConfig& cfg);

/// Dual-only subgradient ascent at fixed B with step eta0 / sqrt(s).
/// Returns the best dual value seen; `duals` holds the final iterate.
double dual_ascent(const Matrix& b, DualPair& duals, const SampleSet& x,
                   const SampleSet& y, double lambda, int steps, double eta0);

/// Projected supergradient ascent on the dualized relaxation, starting from
/// the uniform direction. Tracks the best dual value and returns the
/// dominant (largest |eigenvalue|) eigenvector of the best iterate, sign
/// canonicalized. Requires x.size() >= y.size(); otherwise roles are swapped
/// internally (the divergence is symmetric).
RelaxResult relax_solve(const SampleSet& x, const SampleSet& y, const RelaxConfig& cfg);

}  // namespace pda
