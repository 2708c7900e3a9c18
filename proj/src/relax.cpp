#include "pda/relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pda/eigen.hpp"
#include "pda/oracle.hpp"
#include "pda/random.hpp"
#include "pda/wasserstein.hpp"

namespace pda {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double penalized_value(double min_sum, double min_scale, const DualPair& duals,
                       const Matrix& b, double lambda) {
  double value = min_scale * min_sum + mean_of(duals.u) + mean_of(duals.v);
  if (lambda > 0.0) value -= lambda * entrywise_l1(b);
  return value;
}

// u/v updates shared by the full and incremental steps. `count_scale`
// multiplies the active counts (the incremental rescaling).
void apply_dual_update(DualPair& duals, const kernels::DualPass& sweep,
                       double count_scale, std::size_t n, std::size_t m, double eta) {
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < n; ++i)
    duals.u[i] += eta * (inv_n - count_scale * static_cast<double>(sweep.row_active[i]) * inv_m);
  for (std::size_t j = 0; j < m; ++j)
    duals.v[j] += eta * (inv_m - count_scale * static_cast<double>(sweep.col_active[j]) * inv_m);
}

// B <- Projection(B + gamma/||dB|| * dB; lambda, gamma/||dB||), skipped when
// the supergradient vanishes.
void apply_b_update(Matrix& b, const Matrix& db, const RelaxConfig& cfg) {
  const double nrm = frobenius_norm(db);
  if (nrm == 0.0) return;
  const double delta = cfg.gamma / nrm;
  Matrix moved = b;
  add_scaled(moved, db, delta);
  b = project_to_feasible(moved, cfg.lambda, delta).entries;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_pairs(std::size_t n,
                                                                  std::size_t m,
                                                                  int count,
                                                                  RandomStream& rs) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(count);
  for (auto& p : pairs) {
    p.first = static_cast<std::uint32_t>(rs.next_below(n));
    p.second = static_cast<std::uint32_t>(rs.next_below(m));
  }
  return pairs;
}

}  // namespace

bool is_relax_feasible(const Matrix& b, double trace_tol, double eig_tol) {
  if (b.rows() != b.cols()) return false;
  if (std::fabs(trace(b) - 1.0) > trace_tol) return false;
  const EigenDecomposition eig = symmetric_eigendecomposition(b);
  return eig.values.back() >= -eig_tol;
}

double dual_value(const Matrix& b, const DualPair& duals, const SampleSet& x,
                  const SampleSet& y, double lambda) {
  const kernels::DualPass sweep = kernels::dual_pass(x, y, b, duals.u, duals.v, false);
  return penalized_value(sweep.min_sum, 1.0 / static_cast<double>(y.size()), duals, b,
                         lambda);
}

double matching_value(const Matrix& b, const SampleSet& x, const SampleSet& y) {
  if (x.dim() != y.dim() || b.rows() != x.dim() || b.cols() != x.dim())
    throw std::invalid_argument("matching_value: dimension mismatch");
  const EigenDecomposition eig = symmetric_eigendecomposition(b);
  const double lead = eig.values.front();
  double rest = 0.0;
  for (std::size_t k = 1; k < eig.values.size(); ++k)
    rest = std::max(rest, std::fabs(eig.values[k]));
  if (lead >= 0.0 && rest <= 1e-12 * std::max(1.0, lead)) {
    // rank-one: costs are sortable along the dominant eigenvector
    Vector q(b.rows());
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = eig.vectors(k, 0);
    if (lead == 0.0) return 0.0;
    return lead * wasserstein1d(project(x, q), project(y, q));
  }
  return oracle::transport_lp(kernels::pair_costs(x, y, b)).value;
}

Vector simplex_project(std::span<const double> values) {
  for (const double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("simplex_project: non-finite");
  Vector sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  Vector out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = std::max(0.0, values[i] - tau);
  return out;
}

TraceOneMatrix project_to_feasible(const Matrix& b, double lambda, double delta) {
  if (b.rows() != b.cols())
    throw std::invalid_argument("project_to_feasible: matrix not square");
  if (max_asymmetry(b) > 1e-8 * std::max(1.0, max_abs(b)))
    throw std::invalid_argument("project_to_feasible: matrix not symmetric");
  Matrix sym = b;
  symmetrize(sym);

  const EigenDecomposition eig = symmetric_eigendecomposition(sym);
  const Vector w = simplex_project(eig.values);
  Matrix projected = assemble_symmetric(eig.vectors, w);

  // Feasibility holds here, before any thresholding.
  if (std::fabs(trace(projected) - 1.0) > 1e-8)
    throw std::runtime_error("project_to_feasible: trace drifted");

  if (lambda > 0.0 && delta > 0.0) {
    const double threshold = delta * lambda;
    for (std::size_t i = 0; i < projected.size(); ++i) {
      const double v = projected.data()[i];
      const double mag = std::fabs(v) - threshold;
      projected.data()[i] = mag > 0.0 ? std::copysign(mag, v) : 0.0;
    }
    symmetrize(projected);
  }
  return TraceOneMatrix{std::move(projected)};
}

double supergradient_step(RelaxState& state, const SampleSet& x, const SampleSet& y,
                          const RelaxConfig& cfg) {
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const int t = state.iter + 1;
  const double eta_t = cfg.eta / std::sqrt(static_cast<double>(t));
  const double inv_m = 1.0 / static_cast<double>(m);

  double entry_value = std::numeric_limits<double>::quiet_NaN();
  Matrix scatter;
  bool have_scatter = false;
  for (int pass = 0; pass < std::max(1, cfg.dual_steps_per_b); ++pass) {
    const bool last = pass + 1 == std::max(1, cfg.dual_steps_per_b);
    const kernels::DualPass sweep =
        kernels::dual_pass(x, y, state.b, state.duals.u, state.duals.v, last);
    if (pass == 0)
      entry_value =
          penalized_value(sweep.min_sum, inv_m, state.duals, state.b, cfg.lambda);
    apply_dual_update(state.duals, sweep, 1.0, n, m, eta_t);
    if (last && sweep.has_scatter) {
      scatter = sweep.scatter;
      have_scatter = true;
    }
  }
  if (have_scatter) {
    scale(scatter, inv_m);
    apply_b_update(state.b, scatter, cfg);
  }
  ++state.iter;
  return entry_value;
}

double incremental_step(RelaxState& state, const SampleSet& x, const SampleSet& y,
                        const RelaxConfig& cfg) {
  if (!cfg.incremental_batch.has_value())
    throw std::invalid_argument("incremental_step: incremental_batch not set");
  const int batch = *cfg.incremental_batch;
  if (batch <= 0) throw std::invalid_argument("incremental_step: batch must be positive");

  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const int t = state.iter + 1;
  const double eta_t = cfg.eta / std::sqrt(static_cast<double>(t));
  const double inv_m = 1.0 / static_cast<double>(m);
  const double kappa = static_cast<double>(n) * static_cast<double>(m) /
                       static_cast<double>(batch);

  double entry_value = std::numeric_limits<double>::quiet_NaN();
  Matrix scatter;
  bool have_scatter = false;
  for (int pass = 0; pass < std::max(1, cfg.dual_steps_per_b); ++pass) {
    const bool last = pass + 1 == std::max(1, cfg.dual_steps_per_b);
    RandomStream rs(derive_seed(state.seed, static_cast<std::uint64_t>(t),
                                static_cast<std::uint64_t>(pass)));
    const auto pairs = sample_pairs(n, m, batch, rs);
    const kernels::DualPass sweep =
        kernels::pair_sweep(x, y, state.b, state.duals.u, state.duals.v, pairs, last);
    if (pass == 0)
      entry_value = penalized_value(kappa * sweep.min_sum, inv_m, state.duals,
                                    state.b, cfg.lambda);
    apply_dual_update(state.duals, sweep, kappa, n, m, eta_t);
    if (last && sweep.has_scatter) {
      scatter = sweep.scatter;
      have_scatter = true;
    }
  }
  if (have_scatter) {
    scale(scatter, kappa * inv_m);
    apply_b_update(state.b, scatter, cfg);
  }
  ++state.iter;
  return entry_value;
}

double dual_ascent(const Matrix& b, DualPair& duals, const SampleSet& x,
                   const SampleSet& y, double lambda, int steps, double eta0) {
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const double inv_m = 1.0 / static_cast<double>(m);
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 1; s <= steps; ++s) {
    const kernels::DualPass sweep = kernels::dual_pass(x, y, b, duals.u, duals.v, false);
    best = std::max(best, penalized_value(sweep.min_sum, inv_m, duals, b, lambda));
    apply_dual_update(duals, sweep, 1.0, n, m, eta0 / std::sqrt(static_cast<double>(s)));
  }
  const kernels::DualPass sweep = kernels::dual_pass(x, y, b, duals.u, duals.v, false);
  return std::max(best, penalized_value(sweep.min_sum, inv_m, duals, b, lambda));
}

RelaxResult relax_solve(const SampleSet& x, const SampleSet& y, const RelaxConfig& cfg) {
  if (x.dim() != y.dim()) throw std::invalid_argument("relax_solve: dimension mismatch");
  // The divergence is symmetric in the populations; the dual display assumes
  // the first group is at least as large. Canonical row order makes the run
  // independent of how the caller ordered the samples.
  const bool swapped = x.size() < y.size();
  const SampleSet xs = canonical_row_order(swapped ? y : x);
  const SampleSet ys = canonical_row_order(swapped ? x : y);

  const std::size_t d = xs.dim();
  Vector beta0(d, std::sqrt(static_cast<double>(d)) / static_cast<double>(d));

  RelaxState state;
  state.b = Matrix::outer(beta0);
  state.duals.u.assign(xs.size(), 0.0);
  state.duals.v.assign(ys.size(), 0.0);
  state.seed = cfg.seed;

  double best_value = -std::numeric_limits<double>::infinity();
  Matrix best_b = state.b;
  int since_improvement = 0;
  RelaxTrace trace;
  trace.iterations.reserve(std::min(cfg.max_iter, 4096));

  const bool incremental = cfg.incremental_batch.has_value();
  while (state.iter < cfg.max_iter && since_improvement < cfg.patience) {
    const Matrix b_before = state.b;
    const double value = incremental ? incremental_step(state, xs, ys, cfg)
                                     : supergradient_step(state, xs, ys, cfg);
    if (!std::isfinite(value))
      throw std::runtime_error("relax_solve: non-finite objective (step sizes too large)");
    if (value > best_value) {
      best_value = value;
      best_b = b_before;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    double primal = std::numeric_limits<double>::quiet_NaN();
    if (cfg.primal_log_every > 0 && state.iter % cfg.primal_log_every == 0)
      primal = matching_value(state.b, xs, ys) - cfg.lambda * entrywise_l1(state.b);
    trace.iterations.push_back({state.iter, value, best_value, primal});
  }

  // The final state never got evaluated inside the loop; let it compete.
  const double final_value = dual_value(state.b, state.duals, xs, ys, cfg.lambda);
  if (std::isfinite(final_value) && final_value > best_value) {
    best_value = final_value;
    best_b = state.b;
  }

  const EigenDecomposition eig = symmetric_eigendecomposition(best_b);
  std::size_t lead = 0;
  for (std::size_t k = 1; k < eig.values.size(); ++k)
    if (std::fabs(eig.values[k]) > std::fabs(eig.values[lead])) lead = k;
  Vector beta(d);
  for (std::size_t k = 0; k < d; ++k) beta[k] = eig.vectors(k, lead);
  const double nrm = norm2(beta);
  if (nrm > 1.0) for (double& v : beta) v /= nrm;

  return RelaxResult{TraceOneMatrix{std::move(best_b)},
                     ProjectionVector::canonicalized(std::move(beta)), best_value,
                     std::move(trace)};
}

}  // namespace pda
