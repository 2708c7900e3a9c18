#pragma once

#include <cstdint>
#include <span>

#include "pda/types.hpp"

namespace pda {

struct TightenConfig {
  std::size_t k = 0;       // sparsity level, 1 <= k <= d
  double step0 = 0.5;      // step size step0 / sqrt(t)
  int max_iter = 5000;
  double tol = 1e-9;       // stop after 100 stalled best-objective iterations
  std::uint64_t seed = 0;  // reserved; the iteration itself is deterministic
};

/// Rescale into the unit ball (norms above 1 are clipped to 1, directions
/// kept) and apply the sign convention. A zero vector comes back unchanged.
Vector project_half_ball(Vector beta);

/// Keep the k largest-magnitude entries (ties go to the lower index), zero
/// the rest.
Vector truncate_topk(Vector beta, std::size_t k);

/// Sorted index orders of the projected samples, carried between iterations
/// so the next sort is nearly linear.
struct SortCache {
  std::vector<std::size_t> order_x;
  std::vector<std::size_t> order_y;
};

struct ObjectiveGradient {
  double objective;
  Vector gradient;
};

/// Objective and gradient of J at beta in one pass. When `cache` is supplied
/// its orders are re-sorted by insertion and updated in place; the result is
/// identical to a cold sort.
ObjectiveGradient sorted_gradient_pass(const SampleSet& x, const SampleSet& y,
                                       std::span<const double> beta, SortCache* cache);

struct TightenResult {
  ProjectionVector beta;
  double objective;
  int iterations;
};

/// Projected gradient ascent on J over the k-sparse unit half-ball, starting
/// from beta0. Each iteration steps along the gradient, rescales into the
/// ball, truncates to the top k magnitudes, and re-applies the sign
/// convention; the best objective seen (including the projected start) is
/// returned.
TightenResult tighten(const SampleSet& x, const SampleSet& y,
                      std::span<const double> beta0, const TightenConfig& cfg);

}  // namespace pda
