#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pda/types.hpp"

namespace pda::oracle {

struct TransportPlanEntry {
  std::size_t i;
  std::size_t j;
  double weight;
};

struct TransportSolution {
  double value = 0.0;
  std::vector<TransportPlanEntry> plan;
};

/// Exact optimum of min sum c_ij M_ij over nonnegative matrices with row
/// sums 1/n and column sums 1/m. Solved as an integral min-cost flow
/// (successive shortest paths on the problem scaled to n*m unit shipments),
/// so it is a reference independent of the sorting-based fast path.
/// Desk scale only: throws when n*m exceeds 250000.
TransportSolution transport_lp(const Matrix& costs);

/// Central finite differences of the projected divergence.
Vector finite_difference_gradient(const SampleSet& x, const SampleSet& y,
                                  std::span<const double> beta, double h = 1e-6);

}  // namespace pda::oracle
