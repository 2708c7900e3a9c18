#include "pda/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace pda {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t q = p + 1; q < a.cols(); ++q) s += 2.0 * a(p, q) * a(p, q);
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition symmetric_eigendecomposition(const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("symmetric_eigendecomposition: matrix not square");
  const std::size_t d = m.rows();
  const double scale = std::max(1.0, max_abs(m));
  if (max_asymmetry(m) > 1e-10 * scale)
    throw std::invalid_argument("symmetric_eigendecomposition: matrix not symmetric");

  Matrix a = m;
  symmetrize(a);
  Matrix q = Matrix::identity(d);

  const double fro = frobenius_norm(a);
  const double tol = 1e-12 * std::max(fro, 1e-300);

  constexpr int kMaxSweeps = 100;
  bool converged = off_diagonal_norm(a) <= tol;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t r = p + 1; r < d; ++r) {
        const double apq = a(p, r);
        if (std::fabs(apq) <= 1e-300) continue;
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::fabs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) -= t * apq;
        a(r, r) += t * apq;
        a(p, r) = 0.0;
        a(r, p) = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          if (k == p || k == r) continue;
          const double akp = a(k, p);
          const double akr = a(k, r);
          a(k, p) = akp - s * (akr + tau * akp);
          a(p, k) = a(k, p);
          a(k, r) = akr + s * (akp - tau * akr);
          a(r, k) = a(k, r);
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = q(k, p);
          const double vkr = q(k, r);
          q(k, p) = vkp - s * (vkr + tau * vkp);
          q(k, r) = vkr + s * (vkp - tau * vkr);
        }
      }
    }
    converged = off_diagonal_norm(a) <= tol;
  }
  if (!converged)
    throw std::runtime_error(
        "symmetric_eigendecomposition: no convergence within 100 sweeps");

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.vectors = Matrix(d, d);
  out.values.resize(d);
  for (std::size_t col = 0; col < d; ++col) {
    const std::size_t src = order[col];
    out.values[col] = a(src, src);
    for (std::size_t k = 0; k < d; ++k) out.vectors(k, col) = q(k, src);
  }
  return out;
}

Matrix assemble_symmetric(const Matrix& q, std::span<const double> values) {
  const std::size_t d = q.rows();
  if (q.cols() != d || values.size() != d)
    throw std::invalid_argument("assemble_symmetric: shape mismatch");
  Matrix scaled = q;  // columns scaled by their eigenvalue
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) scaled(i, j) = q(i, j) * values[j];
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += scaled(i, k) * q(j, k);
      out(i, j) = s;
    }
  symmetrize(out);
  return out;
}

Matrix psd_sqrt(const Matrix& m, double neg_tol) {
  EigenDecomposition eig = symmetric_eigendecomposition(m);
  for (double& v : eig.values) {
    if (v < -neg_tol) throw std::invalid_argument("psd_sqrt: matrix not PSD");
    v = std::sqrt(std::max(v, 0.0));
  }
  return assemble_symmetric(eig.vectors, eig.values);
}

}  // namespace pda
