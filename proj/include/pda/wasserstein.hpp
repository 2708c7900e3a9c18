#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pda/types.hpp"

namespace pda {

/// beta^T x_i for every row of the sample set.
Vector project(const SampleSet& samples, std::span<const double> beta);

/// Northwest-corner coupling of uniform(1/n) and uniform(1/m) masses over
/// sorted ranks. When n == m this is the identity pairing with weight 1/n.
QuantileCoupling quantile_coupling(std::size_t n, std::size_t m);

/// Squared L2 Wasserstein distance between two univariate empirical
/// distributions: sort both sides and integrate the squared quantile gap.
double wasserstein1d(std::span<const double> xs, std::span<const double> ys);

/// Projected divergence J(beta) = wasserstein1d(X beta, Y beta).
double objective(const SampleSet& x, const SampleSet& y, std::span<const double> beta);

/// Gradient of J at beta: 2 * sum over the coupling of w * (beta^T z) * z
/// with z = x_i - y_j. At ties in the projected values, the sort breaks ties
/// by sample index and the result is a subgradient of the selected coupling.
Vector gradient(const SampleSet& x, const SampleSet& y, std::span<const double> beta);

/// Analytic squared Wasserstein between Gaussians:
///   ||mu_x - mu_y||^2 + ||Sx^{1/2} - Sy^{1/2}||_F^2.
/// Exact when the covariances commute; used as a test oracle under that
/// restriction.
double gaussian_wasserstein(const GaussianSpec& gx, const GaussianSpec& gy);

namespace detail {

/// Indices sorted by (value, index); the tie-break makes the order unique,
/// so any correct sort of the same values yields the same permutation.
std::vector<std::size_t> sorted_order(std::span<const double> values);

/// Re-sorts a cached order by straight insertion; linear for nearly sorted
/// input and identical to a cold sorted_order.
void insertion_resort(std::span<const double> values, std::vector<std::size_t>& order);

struct CoupledPass {
  double objective = 0.0;
  Vector gradient;
};

/// Objective and (optionally) gradient accumulated over the northwest-corner
/// coupling of the given sorted orders. One deterministic accumulation shared
/// by the cold-sort and cached-sort paths.
CoupledPass coupled_pass(const SampleSet& x, const SampleSet& y,
                         std::span<const double> px, std::span<const double> py,
                         std::span<const std::size_t> ox,
                         std::span<const std::size_t> oy, bool want_gradient);

}  // namespace detail

}  // namespace pda
