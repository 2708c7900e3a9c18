#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pda {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. A small container shared across the
/// library, not a general linear-algebra abstraction.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  /// v v^T
  static Matrix outer(std::span<const double> v) {
    Matrix m(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * v[j];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

/// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vector matvec(const Matrix& m, std::span<const double> v) {
  if (v.size() != m.cols()) throw std::invalid_argument("matvec: dimension mismatch");
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v);
  return out;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double av = a(i, k);
      const auto brow = b.row(k);
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

inline double trace(const Matrix& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) t += m(i, i);
  return t;
}

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.data()[i] * m.data()[i];
  return std::sqrt(s);
}

/// Sum of entry magnitudes (the matrix l1 norm used by the penalty).
inline double entrywise_l1(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += std::fabs(m.data()[i]);
  return s;
}

inline double max_abs(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s = std::max(s, std::fabs(m.data()[i]));
  return s;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s = std::max(s, std::fabs(a.data()[i] - b.data()[i]));
  return s;
}

inline double max_asymmetry(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      s = std::max(s, std::fabs(m(i, j) - m(j, i)));
  return s;
}

inline void symmetrize(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = v;
      m(j, i) = v;
    }
}

/// a += s * b
inline void add_scaled(Matrix& a, const Matrix& b, double s) {
  if (!a.same_shape(b)) throw std::invalid_argument("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += s * b.data()[i];
}

inline void scale(Matrix& m, double s) {
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] *= s;
}

}  // namespace pda
