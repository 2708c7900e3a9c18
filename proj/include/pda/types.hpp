#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pda/matrix.hpp"

namespace pda {

/// One sample population: n observations of d features, one row per
/// observation. Entries must be finite.
class SampleSet {
 public:
  explicit SampleSet(Matrix data) : data_(std::move(data)) {
    if (data_.rows() == 0 || data_.cols() == 0)
      throw std::invalid_argument("SampleSet: need at least one row and one column");
    for (std::size_t i = 0; i < data_.size(); ++i)
      if (!std::isfinite(data_.data()[i]))
        throw std::invalid_argument("SampleSet: non-finite entry");
  }

  std::size_t size() const { return data_.rows(); }  // n
  std::size_t dim() const { return data_.cols(); }   // d
  std::span<const double> row(std::size_t i) const { return data_.row(i); }
  const Matrix& matrix() const { return data_; }

 private:
  Matrix data_;
};

/// Flips the sign of the whole vector if its first nonzero coordinate is
/// negative. The divergence is even in beta, so this costs nothing.
inline void canonical_sign(std::span<double> v) {
  for (const double x : v) {
    if (x != 0.0) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      return;
    }
  }
}

/// Direction in the unit half-ball: ||beta||_2 <= 1 (small slack) and first
/// nonzero coordinate >= 0.
class ProjectionVector {
 public:
  explicit ProjectionVector(Vector coords) : coords_(std::move(coords)) { validate(); }

  /// Applies the sign convention before validating.
  static ProjectionVector canonicalized(Vector coords) {
    canonical_sign(coords);
    return ProjectionVector(std::move(coords));
  }

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const Vector& coords() const { return coords_; }
  std::span<const double> span() const { return coords_; }

 private:
  void validate() const {
    if (coords_.empty()) throw std::invalid_argument("ProjectionVector: empty");
    for (const double x : coords_)
      if (!std::isfinite(x)) throw std::invalid_argument("ProjectionVector: non-finite");
    if (norm2(coords_) > 1.0 + 1e-9)
      throw std::invalid_argument("ProjectionVector: outside the unit ball");
    for (const double x : coords_) {
      if (x != 0.0) {
        if (x < 0.0)
          throw std::invalid_argument("ProjectionVector: sign convention violated");
        break;
      }
    }
  }

  Vector coords_;
};

/// Rows sorted lexicographically. The solvers work on this canonical form,
/// which makes their output a function of the sample multiset rather than
/// of the row order the caller happened to use.
inline SampleSet canonical_row_order(const SampleSet& s) {
  const std::size_t n = s.size();
  const std::size_t d = s.dim();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = s.row(a);
    const auto rb = s.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = s.row(order[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return SampleSet(std::move(out));
}

struct CouplingEntry {
  std::size_t x_index;
  std::size_t y_index;
  double weight;
};

/// Sparse transport plan between two uniform empirical distributions over
/// sorted ranks. Row marginals sum to 1/n, column marginals to 1/m, and the
/// support has at most n + m - 1 entries.
struct QuantileCoupling {
  std::vector<CouplingEntry> entries;
};

/// Mean and covariance of a multivariate Gaussian. Consumers validate
/// symmetry (1e-12) and positive semidefiniteness (eigenvalues >= -1e-10).
struct GaussianSpec {
  Vector mean;
  Matrix covariance;
};

}  // namespace pda
