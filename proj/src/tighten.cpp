#include "pda/tighten.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pda/wasserstein.hpp"

namespace pda {

Vector project_half_ball(Vector beta) {
  for (const double v : beta)
    if (!std::isfinite(v)) throw std::invalid_argument("project_half_ball: non-finite");
  const double nrm = norm2(beta);
  if (nrm > 1.0)
    for (double& v : beta) v /= nrm;
  canonical_sign(beta);
  return beta;
}

Vector truncate_topk(Vector beta, std::size_t k) {
  if (k == 0 || k > beta.size())
    throw std::invalid_argument("truncate_topk: k out of range");
  if (k == beta.size()) return beta;
  std::vector<std::size_t> order(beta.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // ties go to the lower index
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(beta[a]) > std::fabs(beta[b]);
  });
  Vector out(beta.size(), 0.0);
  for (std::size_t r = 0; r < k; ++r) out[order[r]] = beta[order[r]];
  return out;
}

ObjectiveGradient sorted_gradient_pass(const SampleSet& x, const SampleSet& y,
                                       std::span<const double> beta, SortCache* cache) {
  if (x.dim() != y.dim() || beta.size() != x.dim())
    throw std::invalid_argument("sorted_gradient_pass: dimension mismatch");
  const Vector px = project(x, beta);
  const Vector py = project(y, beta);

  std::vector<std::size_t> cold_x;
  std::vector<std::size_t> cold_y;
  std::vector<std::size_t>* ox = &cold_x;
  std::vector<std::size_t>* oy = &cold_y;
  if (cache != nullptr && cache->order_x.size() == px.size() &&
      cache->order_y.size() == py.size()) {
    detail::insertion_resort(px, cache->order_x);
    detail::insertion_resort(py, cache->order_y);
    ox = &cache->order_x;
    oy = &cache->order_y;
  } else {
    cold_x = detail::sorted_order(px);
    cold_y = detail::sorted_order(py);
    if (cache != nullptr) {
      cache->order_x = cold_x;
      cache->order_y = cold_y;
      ox = &cache->order_x;
      oy = &cache->order_y;
    }
  }

  const auto pass = detail::coupled_pass(x, y, px, py, *ox, *oy, true);
  return ObjectiveGradient{pass.objective, pass.gradient};
}

TightenResult tighten(const SampleSet& x_in, const SampleSet& y_in,
                      std::span<const double> beta0, const TightenConfig& cfg) {
  const std::size_t d = x_in.dim();
  if (y_in.dim() != d || beta0.size() != d)
    throw std::invalid_argument("tighten: dimension mismatch");
  if (cfg.k == 0 || cfg.k > d) throw std::invalid_argument("tighten: k out of range");
  bool nonzero = false;
  for (const double v : beta0) nonzero = nonzero || v != 0.0;
  if (!nonzero) throw std::invalid_argument("tighten: beta0 is zero");
  const SampleSet x = canonical_row_order(x_in);
  const SampleSet y = canonical_row_order(y_in);

  constexpr int kStallWindow = 100;

  Vector beta = project_half_ball(Vector(beta0.begin(), beta0.end()));
  beta = truncate_topk(std::move(beta), cfg.k);
  canonical_sign(beta);

  SortCache cache;
  ObjectiveGradient pass = sorted_gradient_pass(x, y, beta, &cache);
  if (!std::isfinite(pass.objective))
    throw std::runtime_error("tighten: non-finite objective");
  Vector best_beta = beta;
  double best_objective = pass.objective;
  int stalled = 0;
  int t = 0;
  while (t < cfg.max_iter && stalled < kStallWindow) {
    ++t;
    const double step = cfg.step0 / std::sqrt(static_cast<double>(t));
    for (std::size_t c = 0; c < d; ++c) beta[c] += step * pass.gradient[c];
    beta = project_half_ball(std::move(beta));
    beta = truncate_topk(std::move(beta), cfg.k);
    canonical_sign(beta);
    nonzero = false;
    for (const double v : beta) nonzero = nonzero || v != 0.0;
    if (!nonzero) throw std::runtime_error("tighten: degenerate zero iterate");

    pass = sorted_gradient_pass(x, y, beta, &cache);
    if (!std::isfinite(pass.objective))
      throw std::runtime_error("tighten: non-finite objective");
    if (pass.objective > best_objective + cfg.tol)
      stalled = 0;
    else
      ++stalled;
    if (pass.objective > best_objective) {
      best_objective = pass.objective;
      best_beta = beta;
    }
  }

  return TightenResult{ProjectionVector::canonicalized(std::move(best_beta)),
                       best_objective, t};
}

}  // namespace pda
