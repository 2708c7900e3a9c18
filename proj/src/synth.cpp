#include "pda/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "pda/eigen.hpp"
#include "pda/random.hpp"

namespace pda {

namespace {

double chi_squared(RandomStream& rs, int dof) {
  double s = 0.0;
  for (int k = 0; k < dof; ++k) {
    const double g = rs.next_normal();
    s += g * g;
  }
  return s;
}

}  // namespace

SampleSet gaussian_sample(const GaussianSpec& spec, std::size_t n, std::uint64_t seed) {
  const std::size_t d = spec.mean.size();
  if (spec.covariance.rows() != d || spec.covariance.cols() != d)
    throw std::invalid_argument("gaussian_sample: dimension mismatch");
  if (max_asymmetry(spec.covariance) > 1e-12)
    throw std::invalid_argument("gaussian_sample: covariance not symmetric");
  const Matrix root = psd_sqrt(spec.covariance);  // throws on non-PSD

  RandomStream rs(seed);
  Matrix out(n, d);
  Vector g(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) g[k] = rs.next_normal();
    auto row = out.row(i);
    for (std::size_t r = 0; r < d; ++r) row[r] = spec.mean[r] + dot(root.row(r), g);
  }
  return SampleSet(std::move(out));
}

Matrix figure1a_sigma_x() {
  Matrix s(3, 3);
  const double vals[3][3] = {{1.0, 0.2, 0.4}, {0.2, 1.0, 0.0}, {0.4, 0.0, 1.0}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) s(i, j) = vals[i][j];
  return s;
}

Matrix figure1a_sigma_y() {
  Matrix s(3, 3);
  const double vals[3][3] = {{1.0, -0.9, 0.0}, {-0.9, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) s(i, j) = vals[i][j];
  return s;
}

std::pair<SampleSet, SampleSet> figure1a_dataset(std::size_t n, std::size_t m,
                                                 std::uint64_t seed) {
  const Vector zero(3, 0.0);
  SampleSet x = gaussian_sample({zero, figure1a_sigma_x()}, n, derive_seed(seed, 1));
  SampleSet y = gaussian_sample({zero, figure1a_sigma_y()}, m, derive_seed(seed, 2));
  return {std::move(x), std::move(y)};
}

Matrix wishart_identity3(std::uint64_t seed) {
  RandomStream rs(seed);
  // Bartlett: lower-triangular A with A_ii = sqrt(chi2(3 - i)) and standard
  // normal strict lower entries; W = A A^T. Draw order is row by row.
  Matrix a(3, 3);
  a(0, 0) = std::sqrt(chi_squared(rs, 3));
  a(1, 0) = rs.next_normal();
  a(1, 1) = std::sqrt(chi_squared(rs, 2));
  a(2, 0) = rs.next_normal();
  a(2, 1) = rs.next_normal();
  a(2, 2) = std::sqrt(chi_squared(rs, 1));
  Matrix w(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * a(j, k);
      w(i, j) = s;
    }
  symmetrize(w);
  return w;
}

WishartBlocksData wishart_blocks_dataset(std::size_t ell, std::size_t n, std::size_t m,
                                         std::uint64_t seed) {
  if (ell == 0) throw std::invalid_argument("wishart_blocks_dataset: ell must be >= 1");
  const std::size_t d = 3 * ell;
  Matrix sigma_x(d, d);
  Matrix sigma_y(d, d);
  for (std::size_t blk = 0; blk < ell; ++blk) {
    Matrix wx;
    Matrix wy;
    if (blk == 0) {
      wx = wishart_identity3(derive_seed(seed, 11, blk));
      wy = wishart_identity3(derive_seed(seed, 12, blk));
    } else {
      wx = wishart_identity3(derive_seed(seed, 13, blk));
      wy = wx;
    }
    const std::size_t off = 3 * blk;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        sigma_x(off + i, off + j) = wx(i, j);
        sigma_y(off + i, off + j) = wy(i, j);
      }
  }
  const Vector zero(d, 0.0);
  SampleSet x = gaussian_sample({zero, sigma_x}, n, derive_seed(seed, 1));
  SampleSet y = gaussian_sample({zero, sigma_y}, m, derive_seed(seed, 2));
  return {std::move(x), std::move(y), {0, 1, 2}};
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "figure1a") return ScenarioKind::kFigure1a;
  if (name == "wishart_blocks") return ScenarioKind::kWishartBlocks;
  if (name == "mean_shift") return ScenarioKind::kMeanShift;
  if (name == "variance_shift") return ScenarioKind::kVarianceShift;
  if (name == "null_identical") return ScenarioKind::kNullIdentical;
  throw std::invalid_argument("unknown scenario: " + name);
}

std::pair<SampleSet, SampleSet> make_scenario(const ScenarioSpec& spec) {
  if (spec.n == 0 || spec.m == 0)
    throw std::invalid_argument("make_scenario: counts must be >= 1");
  switch (spec.kind) {
    case ScenarioKind::kFigure1a:
      return figure1a_dataset(spec.n, spec.m, spec.seed);
    case ScenarioKind::kWishartBlocks: {
      auto data = wishart_blocks_dataset(spec.ell, spec.n, spec.m, spec.seed);
      return {std::move(data.x), std::move(data.y)};
    }
    case ScenarioKind::kMeanShift: {
      const std::size_t d = spec.dim;
      if (d == 0) throw std::invalid_argument("make_scenario: dim must be >= 1");
      Vector shift = spec.shift;
      if (shift.empty()) {
        shift.assign(d, 0.0);
        shift[0] = 2.0;
      }
      if (shift.size() != d)
        throw std::invalid_argument("make_scenario: shift length mismatch");
      Matrix cov = Matrix::identity(d);
      scale(cov, spec.noise_variance);
      SampleSet x = gaussian_sample({Vector(d, 0.0), cov}, spec.n, derive_seed(spec.seed, 1));
      SampleSet y = gaussian_sample({shift, cov}, spec.m, derive_seed(spec.seed, 2));
      return {std::move(x), std::move(y)};
    }
    case ScenarioKind::kVarianceShift: {
      const std::size_t d = spec.dim;
      if (d == 0) throw std::invalid_argument("make_scenario: dim must be >= 1");
      Matrix cov_y = Matrix::identity(d);
      cov_y(0, 0) = spec.variance_factor;
      SampleSet x = gaussian_sample({Vector(d, 0.0), Matrix::identity(d)}, spec.n,
                                    derive_seed(spec.seed, 1));
      SampleSet y =
          gaussian_sample({Vector(d, 0.0), cov_y}, spec.m, derive_seed(spec.seed, 2));
      return {std::move(x), std::move(y)};
    }
    case ScenarioKind::kNullIdentical: {
      const std::size_t d = spec.dim;
      if (d == 0) throw std::invalid_argument("make_scenario: dim must be >= 1");
      Matrix cov = Matrix::identity(d);
      scale(cov, spec.noise_variance);
      const GaussianSpec g{Vector(d, 0.0), cov};
      SampleSet x = gaussian_sample(g, spec.n, derive_seed(spec.seed, 1));
      SampleSet y = gaussian_sample(g, spec.m, derive_seed(spec.seed, 2));
      return {std::move(x), std::move(y)};
    }
  }
  throw std::logic_error("make_scenario: unreachable");
}

}  // namespace pda
