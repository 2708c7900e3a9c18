#include "pda/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "pda/eigen.hpp"

namespace pda {

Vector project(const SampleSet& samples, std::span<const double> beta) {
  const std::size_t n = samples.size();
  const std::size_t d = samples.dim();
  if (beta.size() != d) throw std::invalid_argument("project: dimension mismatch");
  Vector out(n);
  const Matrix& m = samples.matrix();
#pragma omp parallel for schedule(static) if (n * d > 16384)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    out[static_cast<std::size_t>(i)] = dot(m.row(static_cast<std::size_t>(i)), beta);
  return out;
}

QuantileCoupling quantile_coupling(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw std::invalid_argument("quantile_coupling: empty side");
  QuantileCoupling c;
  c.entries.reserve(n + m - 1);
  // Integer mass units of 1/(n*m): each x rank holds m units, each y rank n.
  // Integer bookkeeping keeps the marginals exact.
  const double unit = 1.0 / (static_cast<double>(n) * static_cast<double>(m));
  std::size_t a = 0;
  std::size_t b = 0;
  std::int64_t ra = static_cast<std::int64_t>(m);
  std::int64_t rb = static_cast<std::int64_t>(n);
  while (true) {
    const std::int64_t w = std::min(ra, rb);
    c.entries.push_back({a, b, static_cast<double>(w) * unit});
    ra -= w;
    rb -= w;
    if (ra == 0) {
      if (++a == n) break;
      ra = static_cast<std::int64_t>(m);
    }
    if (rb == 0) {
      if (++b == m) break;
      rb = static_cast<std::int64_t>(n);
    }
  }
  return c;
}

double wasserstein1d(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw std::invalid_argument("wasserstein1d: empty input");
  for (const double v : xs)
    if (!std::isfinite(v)) throw std::invalid_argument("wasserstein1d: non-finite input");
  for (const double v : ys)
    if (!std::isfinite(v)) throw std::invalid_argument("wasserstein1d: non-finite input");

  Vector sx(xs.begin(), xs.end());
  Vector sy(ys.begin(), ys.end());
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());

  const std::size_t n = sx.size();
  const std::size_t m = sy.size();
  const double unit = 1.0 / (static_cast<double>(n) * static_cast<double>(m));
  double total = 0.0;
  std::size_t a = 0;
  std::size_t b = 0;
  std::int64_t ra = static_cast<std::int64_t>(m);
  std::int64_t rb = static_cast<std::int64_t>(n);
  while (true) {
    const std::int64_t w = std::min(ra, rb);
    const double diff = sx[a] - sy[b];
    total += static_cast<double>(w) * unit * diff * diff;
    ra -= w;
    rb -= w;
    if (ra == 0) {
      if (++a == n) break;
      ra = static_cast<std::int64_t>(m);
    }
    if (rb == 0) {
      if (++b == m) break;
      rb = static_cast<std::int64_t>(n);
    }
  }
  return total;
}

double objective(const SampleSet& x, const SampleSet& y, std::span<const double> beta) {
  if (x.dim() != y.dim() || beta.size() != x.dim())
    throw std::invalid_argument("objective: dimension mismatch");
  // J is even in beta; evaluating under the sign convention makes
  // J(-beta) == J(beta) hold exactly, not just up to summation order.
  Vector canon(beta.begin(), beta.end());
  canonical_sign(canon);
  return wasserstein1d(project(x, canon), project(y, canon));
}

Vector gradient(const SampleSet& x, const SampleSet& y, std::span<const double> beta) {
  if (x.dim() != y.dim() || beta.size() != x.dim())
    throw std::invalid_argument("gradient: dimension mismatch");
  const Vector px = project(x, beta);
  const Vector py = project(y, beta);
  const auto ox = detail::sorted_order(px);
  const auto oy = detail::sorted_order(py);
  return detail::coupled_pass(x, y, px, py, ox, oy, true).gradient;
}

double gaussian_wasserstein(const GaussianSpec& gx, const GaussianSpec& gy) {
  const std::size_t d = gx.mean.size();
  if (gy.mean.size() != d || gx.covariance.rows() != d || gx.covariance.cols() != d ||
      gy.covariance.rows() != d || gy.covariance.cols() != d)
    throw std::invalid_argument("gaussian_wasserstein: dimension mismatch");
  if (max_asymmetry(gx.covariance) > 1e-12 || max_asymmetry(gy.covariance) > 1e-12)
    throw std::invalid_argument("gaussian_wasserstein: covariance not symmetric");

  const Matrix sx = psd_sqrt(gx.covariance);  // throws on non-PSD input
  const Matrix sy = psd_sqrt(gy.covariance);

  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = gx.mean[i] - gy.mean[i];
    mean_term += diff * diff;
  }
  double cov_term = 0.0;
  for (std::size_t i = 0; i < sx.size(); ++i) {
    const double diff = sx.data()[i] - sy.data()[i];
    cov_term += diff * diff;
  }
  return mean_term + cov_term;
}

namespace detail {

std::vector<std::size_t> sorted_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  return order;
}

void insertion_resort(std::span<const double> values, std::vector<std::size_t>& order) {
  const auto less = [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  };
  for (std::size_t k = 1; k < order.size(); ++k) {
    const std::size_t key = order[k];
    std::size_t pos = k;
    while (pos > 0 && less(key, order[pos - 1])) {
      order[pos] = order[pos - 1];
      --pos;
    }
    order[pos] = key;
  }
}

CoupledPass coupled_pass(const SampleSet& x, const SampleSet& y,
                         std::span<const double> px, std::span<const double> py,
                         std::span<const std::size_t> ox,
                         std::span<const std::size_t> oy, bool want_gradient) {
  const std::size_t n = px.size();
  const std::size_t m = py.size();
  const std::size_t d = x.dim();
  CoupledPass out;
  if (want_gradient) out.gradient.assign(d, 0.0);

  const double unit = 1.0 / (static_cast<double>(n) * static_cast<double>(m));
  std::size_t a = 0;
  std::size_t b = 0;
  std::int64_t ra = static_cast<std::int64_t>(m);
  std::int64_t rb = static_cast<std::int64_t>(n);
  while (true) {
    const std::int64_t w = std::min(ra, rb);
    const std::size_t i = ox[a];
    const std::size_t j = oy[b];
    const double weight = static_cast<double>(w) * unit;
    const double diff = px[i] - py[j];
    out.objective += weight * diff * diff;
    if (want_gradient) {
      const double coeff = 2.0 * weight * diff;
      const auto xi = x.row(i);
      const auto yj = y.row(j);
      for (std::size_t c = 0; c < d; ++c) out.gradient[c] += coeff * (xi[c] - yj[c]);
    }
    ra -= w;
    rb -= w;
    if (ra == 0) {
      if (++a == n) break;
      ra = static_cast<std::int64_t>(m);
    }
    if (rb == 0) {
      if (++b == m) break;
      rb = static_cast<std::int64_t>(n);
    }
  }
  return out;
}

}  // namespace detail

}  // namespace pda
