#include "pda/kernels.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pda::kernels {

namespace {

constexpr std::size_t kRowBlock = 64;

bool in_parallel_region() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return false;
#endif
}

void check_dims(const SampleSet& x, const SampleSet& y, const Matrix& b,
                std::span<const double> u, std::span<const double> v) {
  if (x.dim() != y.dim() || b.rows() != x.dim() || b.cols() != x.dim())
    throw std::invalid_argument("dual pass: dimension mismatch");
  if (u.size() != x.size() || v.size() != y.size())
    throw std::invalid_argument("dual pass: dual vector size mismatch");
}

struct Projected {
  Matrix gx;  // X * B, row i = B x_i
  Matrix gy;  // Y * B
  Vector px;  // x_i^T B x_i
  Vector qy;  // y_j^T B y_j
};

Projected precompute(const SampleSet& x, const SampleSet& y, const Matrix& b) {
  Projected p;
  p.gx = matmul(x.matrix(), b);
  p.gy = matmul(y.matrix(), b);
  p.px.resize(x.size());
  p.qy.resize(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) p.px[i] = dot(p.gx.row(i), x.row(i));
  for (std::size_t j = 0; j < y.size(); ++j) p.qy[j] = dot(p.gy.row(j), y.row(j));
  for (const double v : p.px)
    if (!std::isfinite(v))
      throw std::runtime_error("dual pass: non-finite objective terms");
  for (const double v : p.qy)
    if (!std::isfinite(v))
      throw std::runtime_error("dual pass: non-finite objective terms");
  return p;
}

}  // namespace

DualPass dual_pass(const SampleSet& x, const SampleSet& y, const Matrix& b,
                   std::span<const double> u, std::span<const double> v,
                   bool want_scatter) {
  check_dims(x, y, b, u, v);
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const std::size_t d = x.dim();
  const Projected pre = precompute(x, y, b);

  DualPass out;
  out.row_active.assign(n, 0);
  out.col_active.assign(m, 0);
  out.has_scatter = want_scatter;

  const std::size_t nblocks = (n + kRowBlock - 1) / kRowBlock;
  std::vector<double> block_min(nblocks, 0.0);
  std::vector<std::vector<std::int64_t>> block_col(nblocks);
  std::vector<Matrix> block_scatter;
  if (want_scatter) block_scatter.assign(nblocks, Matrix(d, d));

  const bool parallel_ok = !in_parallel_region() && n * m * d > 32768;
#pragma omp parallel for schedule(static) if (parallel_ok)
  for (std::ptrdiff_t bk = 0; bk < static_cast<std::ptrdiff_t>(nblocks); ++bk) {
    const std::size_t i0 = static_cast<std::size_t>(bk) * kRowBlock;
    const std::size_t i1 = std::min(i0 + kRowBlock, n);
    auto& col = block_col[static_cast<std::size_t>(bk)];
    col.assign(m, 0);
    double msum = 0.0;
    Vector s(d);
    for (std::size_t i = i0; i < i1; ++i) {
      const auto gi = pre.gx.row(i);
      const double base = pre.px[i] - u[i];
      std::int64_t cnt = 0;
      if (want_scatter) std::fill(s.begin(), s.end(), 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        const double slack = base + pre.qy[j] - v[j] - 2.0 * dot(gi, y.row(j));
        if (slack < 0.0) {
          msum += slack;
          ++cnt;
          ++col[j];
          if (want_scatter) axpy(1.0, y.row(j), s);
        }
      }
      out.row_active[i] = cnt;
      if (want_scatter && cnt > 0) {
        Matrix& sc = block_scatter[static_cast<std::size_t>(bk)];
        const auto xi = x.row(i);
        const double centered = static_cast<double>(cnt);
        for (std::size_t r = 0; r < d; ++r) {
          const double xr = xi[r];
          auto row = sc.row(r);
          for (std::size_t c = 0; c < d; ++c)
            row[c] += centered * xr * xi[c] - xr * s[c] - s[r] * xi[c];
        }
      }
    }
    block_min[static_cast<std::size_t>(bk)] = msum;
  }

  // Fixed-order combine across blocks.
  for (std::size_t bk = 0; bk < nblocks; ++bk) {
    out.min_sum += block_min[bk];
    for (std::size_t j = 0; j < m; ++j) out.col_active[j] += block_col[bk][j];
  }
  if (want_scatter) {
    out.scatter = Matrix(d, d);
    for (std::size_t bk = 0; bk < nblocks; ++bk)
      add_scaled(out.scatter, block_scatter[bk], 1.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (out.col_active[j] == 0) continue;
      const double cnt = static_cast<double>(out.col_active[j]);
      const auto yj = y.row(j);
      for (std::size_t r = 0; r < d; ++r) {
        auto row = out.scatter.row(r);
        const double yr = yj[r];
        for (std::size_t c = 0; c < d; ++c) row[c] += cnt * yr * yj[c];
      }
    }
  }
  return out;
}

DualPass reference_dual_pass(const SampleSet& x, const SampleSet& y, const Matrix& b,
                             std::span<const double> u, std::span<const double> v,
                             bool want_scatter) {
  check_dims(x, y, b, u, v);
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const std::size_t d = x.dim();

  DualPass out;
  out.row_active.assign(n, 0);
  out.col_active.assign(m, 0);
  out.has_scatter = want_scatter;
  if (want_scatter) out.scatter = Matrix(d, d);

  Vector z(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const auto yj = y.row(j);
      for (std::size_t c = 0; c < d; ++c) z[c] = xi[c] - yj[c];
      double cost = 0.0;
      for (std::size_t r = 0; r < d; ++r) cost += z[r] * dot(b.row(r), z);
      const double slack = cost - u[i] - v[j];
      if (slack < 0.0) {
        out.min_sum += slack;
        ++out.row_active[i];
        ++out.col_active[j];
        if (want_scatter)
          for (std::size_t r = 0; r < d; ++r) {
            auto row = out.scatter.row(r);
            for (std::size_t c = 0; c < d; ++c) row[c] += z[r] * z[c];
          }
      }
    }
  }
  return out;
}

DualPass pair_sweep(const SampleSet& x, const SampleSet& y, const Matrix& b,
                    std::span<const double> u, std::span<const double> v,
                    std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
                    bool want_scatter) {
  check_dims(x, y, b, u, v);
  const std::size_t d = x.dim();
  const Projected pre = precompute(x, y, b);

  DualPass out;
  out.row_active.assign(x.size(), 0);
  out.col_active.assign(y.size(), 0);
  out.has_scatter = want_scatter;
  if (want_scatter) out.scatter = Matrix(d, d);

  for (const auto& [i, j] : pairs) {
    const double slack =
        pre.px[i] - u[i] + pre.qy[j] - v[j] - 2.0 * dot(pre.gx.row(i), y.row(j));
    if (slack < 0.0) {
      out.min_sum += slack;
      ++out.row_active[i];
      ++out.col_active[j];
      if (want_scatter) {
        const auto xi = x.row(i);
        const auto yj = y.row(j);
        for (std::size_t r = 0; r < d; ++r) {
          const double zr = xi[r] - yj[r];
          auto row = out.scatter.row(r);
          for (std::size_t c = 0; c < d; ++c) row[c] += zr * (xi[c] - yj[c]);
        }
      }
    }
  }
  return out;
}

Matrix pair_costs(const SampleSet& x, const SampleSet& y, const Matrix& b) {
  if (x.dim() != y.dim() || b.rows() != x.dim() || b.cols() != x.dim())
    throw std::invalid_argument("pair_costs: dimension mismatch");
  const Projected pre = precompute(x, y, b);
  Matrix costs(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      costs(i, j) = pre.px[i] + pre.qy[j] - 2.0 * dot(pre.gx.row(i), y.row(j));
  return costs;
}

}  // namespace pda::kernels
