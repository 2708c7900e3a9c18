#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pda/types.hpp"

namespace pda::kernels {

struct DualPass {
  double min_sum = 0.0;                 // sum of the active (negative) slacks
  std::vector<std::int64_t> row_active;  // active count per x row
  std::vector<std::int64_t> col_active;  // active count per y row
  Matrix scatter;                        // sum of z z^T over active pairs
  bool has_scatter = false;
};

/// Active-set sweep of the dualized inner problem. For every pair (i, j) the
/// slack is x_i^T B x_i + y_j^T B y_j - 2 x_i^T B y_j - u_i - v_j; pairs with
/// negative slack contribute to min_sum, to the counts, and (optionally) to
/// the scatter matrix. Work is split into row blocks of a fixed size and the
/// block partials are combined in block order, so the result does not depend
/// on the thread count.
DualPass dual_pass(const SampleSet& x, const SampleSet& y, const Matrix& b,
                   std::span<const double> u, std::span<const double> v,
                   bool want_scatter);

/// Same contract as dual_pass, written as the direct per-pair double loop.
/// Serial; kept as the reference the blocked kernel is tested and
/// benchmarked against.
DualPass reference_dual_pass(const SampleSet& x, const SampleSet& y, const Matrix& b,
                             std::span<const double> u, std::span<const double> v,
                             bool want_scatter);

/// Sweep over an explicit pair list (the incremental variant). Pairs may
/// repeat; contributions are accumulated in list order.
DualPass pair_sweep(const SampleSet& x, const SampleSet& y, const Matrix& b,
                    std::span<const double> u, std::span<const double> v,
                    std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
                    bool want_scatter);

/// Pairwise costs c_ij = z_ij^T B z_ij as a dense matrix (diagnostics and
/// desk-scale LP paths only). Uses the same decomposition as dual_pass.
Matrix pair_costs(const SampleSet& x, const SampleSet& y, const Matrix& b);

}  // namespace pda::kernels
