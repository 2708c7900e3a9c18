#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pda/types.hpp"

namespace pda {

/// n draws from the Gaussian: row = mean + S g with S the symmetric PSD
/// square root of the covariance and g standard normal from the seeded
/// stream. Same seed, same bits.
SampleSet gaussian_sample(const GaussianSpec& spec, std::size_t n, std::uint64_t seed);

/// The two fixed 3x3 covariances of the correlation-difference scenario.
Matrix figure1a_sigma_x();
Matrix figure1a_sigma_y();

/// Mean-zero Gaussian pair with the figure1a covariances.
std::pair<SampleSet, SampleSet> figure1a_dataset(std::size_t n, std::size_t m,
                                                 std::uint64_t seed);

/// Wishart(I_3, 3 dof) draw via the Bartlett construction (identity scale,
/// so the expectation is 3 I).
Matrix wishart_identity3(std::uint64_t seed);

struct WishartBlocksData {
  SampleSet x;
  SampleSet y;
  std::vector<std::size_t> true_support;  // {0, 1, 2}
};

/// d = 3*ell features in blocks of 3. Every block's covariance is a Wishart
/// draw shared by both groups, except block 1 which gets independent draws
/// for X and Y, so all distributional differences live in features 0..2.
WishartBlocksData wishart_blocks_dataset(std::size_t ell, std::size_t n, std::size_t m,
                                         std::uint64_t seed);

enum class ScenarioKind {
  kFigure1a,
  kWishartBlocks,
  kMeanShift,
  kVarianceShift,
  kNullIdentical,
};

ScenarioKind scenario_kind_from_string(const std::string& name);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kNullIdentical;
  std::size_t n = 100;
  std::size_t m = 100;
  std::uint64_t seed = 0;
  std::size_t ell = 1;            // wishart_blocks: block count
  std::size_t dim = 3;            // mean_shift / variance_shift / null_identical
  Vector shift;                   // mean_shift: mean of Y (defaults to 2 e1)
  double variance_factor = 4.0;   // variance_shift: first marginal variance of Y
  double noise_variance = 1.0;    // isotropic variance for mean_shift / null
};

std::pair<SampleSet, SampleSet> make_scenario(const ScenarioSpec& spec);

}  // namespace pda
