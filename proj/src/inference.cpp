#include "pda/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pda/random.hpp"
#include "pda/wasserstein.hpp"

namespace pda {

namespace {

std::size_t nonzero_count(std::span<const double> v) {
  std::size_t k = 0;
  for (const double x : v)
    if (x != 0.0) ++k;
  return k;
}

Matrix gather_rows(const Matrix& pooled, std::span<const std::size_t> indices,
                   std::size_t d) {
  Matrix out(indices.size(), d);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = pooled.row(indices[r]);
    auto dst = out.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

}  // namespace

AnalysisResult pda_analyze(const SampleSet& x, const SampleSet& y,
                           const RelaxConfig& relax_cfg, const TightenOptions& opts) {
  if (x.dim() != y.dim()) throw std::invalid_argument("pda_analyze: dimension mismatch");
  const std::size_t d = x.dim();

  RelaxResult relaxed = relax_solve(x, y, relax_cfg);

  std::size_t k = d;
  if (opts.k_override.has_value()) {
    k = *opts.k_override;
  } else if (relax_cfg.lambda > 0.0) {
    k = 0;
    for (const double v : relaxed.beta.coords())
      if (std::fabs(v) > opts.support_epsilon) ++k;
    k = std::clamp<std::size_t>(k, 1, d);
  }

  TightenConfig tcfg;
  tcfg.k = k;
  tcfg.step0 = opts.step0;
  tcfg.max_iter = opts.max_iter;
  tcfg.tol = opts.tol;
  tcfg.seed = relax_cfg.seed;
  TightenResult tightened = tighten(x, y, relaxed.beta.span(), tcfg);

  const double relax_objective = objective(x, y, relaxed.beta.span());
  ProjectionVector beta = relax_objective > tightened.objective
                              ? relaxed.beta
                              : tightened.beta;
  const double divergence = objective(x, y, beta.span());
  const std::size_t k_effective = nonzero_count(beta.span());
  return AnalysisResult{std::move(beta), divergence, k_effective, relax_cfg.lambda,
                        std::move(relaxed.trace)};
}

AnalysisResult analyze_with_config(const SampleSet& x, const SampleSet& y,
                                   const PipelineConfig& cfg, std::uint64_t run_seed) {
  RelaxConfig relax_cfg = cfg.relax;
  if (cfg.cv.has_value()) {
    const CvResult cv = cross_validate_lambda(x, y, cfg, run_seed);
    relax_cfg.lambda = cv.lambda_star;
  }
  return pda_analyze(x, y, relax_cfg, cfg.tighten);
}

CvResult cross_validate_lambda(const SampleSet& x, const SampleSet& y,
                               const PipelineConfig& cfg, std::uint64_t seed) {
  if (!cfg.cv.has_value())
    throw std::invalid_argument("cross_validate_lambda: no CV config");
  const int folds = cfg.cv->folds;
  if (folds < 2) throw std::invalid_argument("cross_validate_lambda: folds must be >= 2");
  if (cfg.cv->grid.empty())
    throw std::invalid_argument("cross_validate_lambda: empty grid");
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  if (n / folds < 2 || m / folds < 2)
    throw std::invalid_argument("cross_validate_lambda: fold size < 2 samples per group");

  RandomStream rs_x(derive_seed(seed, 101));
  RandomStream rs_y(derive_seed(seed, 202));
  const auto perm_x = random_permutation(n, rs_x);
  const auto perm_y = random_permutation(m, rs_y);

  const auto chunk = [folds](const std::vector<std::size_t>& perm, int f,
                             std::vector<std::size_t>& held,
                             std::vector<std::size_t>& train) {
    const std::size_t total = perm.size();
    const std::size_t lo = total * static_cast<std::size_t>(f) / folds;
    const std::size_t hi = total * static_cast<std::size_t>(f + 1) / folds;
    held.assign(perm.begin() + lo, perm.begin() + hi);
    train.clear();
    train.insert(train.end(), perm.begin(), perm.begin() + lo);
    train.insert(train.end(), perm.begin() + hi, perm.end());
  };

  std::vector<double> grid = cfg.cv->grid;
  std::sort(grid.begin(), grid.end());

  CvResult out;
  out.lambda_star = grid.front();
  double best_mean = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> held_x, train_x, held_y, train_y;
  for (const double lambda : grid) {
    CvRow row;
    row.lambda = lambda;
    double sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      chunk(perm_x, f, held_x, train_x);
      chunk(perm_y, f, held_y, train_y);
      const SampleSet x_train(gather_rows(x.matrix(), train_x, x.dim()));
      const SampleSet y_train(gather_rows(y.matrix(), train_y, y.dim()));
      const SampleSet x_held(gather_rows(x.matrix(), held_x, x.dim()));
      const SampleSet y_held(gather_rows(y.matrix(), held_y, y.dim()));
      RelaxConfig relax_cfg = cfg.relax;
      relax_cfg.lambda = lambda;
      const AnalysisResult fit = pda_analyze(x_train, y_train, relax_cfg, cfg.tighten);
      const double held_div = objective(x_held, y_held, fit.beta.span());
      row.fold_divergences.push_back(held_div);
      sum += held_div;
    }
    row.mean_divergence = sum / folds;
    if (row.mean_divergence > best_mean) {  // ties keep the smaller lambda
      best_mean = row.mean_divergence;
      out.lambda_star = lambda;
    }
    out.table.push_back(std::move(row));
  }
  return out;
}

std::vector<double> default_lambda_grid(const SampleSet& x, const SampleSet& y) {
  const std::size_t d = x.dim();
  const std::size_t total = x.size() + y.size();
  double scale = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mean += x.matrix()(i, c);
    for (std::size_t j = 0; j < y.size(); ++j) mean += y.matrix()(j, c);
    mean /= static_cast<double>(total);
    double var = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double dv = x.matrix()(i, c) - mean;
      var += dv * dv;
    }
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double dv = y.matrix()(j, c) - mean;
      var += dv * dv;
    }
    scale += var / std::max<std::size_t>(1, total - 1);
  }
  scale /= static_cast<double>(d);

  std::vector<double> grid(8);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double expo = -4.0 + 4.0 * static_cast<double>(g) / 7.0;  // 1e-4 .. 1
    grid[g] = scale * std::pow(10.0, expo);
  }
  return grid;
}

PermutationReport permutation_test(const SampleSet& x, const SampleSet& y,
                                   const PipelineConfig& cfg, int n_perm,
                                   std::uint64_t seed) {
  if (n_perm < 1) throw std::invalid_argument("permutation_test: n_perm must be >= 1");
  if (x.dim() != y.dim())
    throw std::invalid_argument("permutation_test: dimension mismatch");
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const std::size_t d = x.dim();

  const AnalysisResult observed_fit =
      analyze_with_config(x, y, cfg, derive_seed(seed, 0));
  const double observed = observed_fit.divergence;

  Matrix pooled(n + m, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = x.row(i);
    std::copy(src.begin(), src.end(), pooled.row(i).begin());
  }
  for (std::size_t j = 0; j < m; ++j) {
    const auto src = y.row(j);
    std::copy(src.begin(), src.end(), pooled.row(n + j).begin());
  }

  std::vector<double> nulls(n_perm);
  std::string error;
  // Independent tasks: permutation b derives its own stream and writes only
  // slot b, so the report is the same for any scheduling.
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < n_perm; ++b) {
    try {
      RandomStream rs(derive_seed(seed, static_cast<std::uint64_t>(b) + 1));
      const auto perm = random_permutation(n + m, rs);
      const SampleSet xb(gather_rows(pooled, {perm.data(), n}, d));
      const SampleSet yb(gather_rows(pooled, {perm.data() + n, m}, d));
      const AnalysisResult fit = analyze_with_config(
          xb, yb, cfg, derive_seed(seed, static_cast<std::uint64_t>(b) + 1, 7));
      nulls[b] = fit.divergence;
    } catch (const std::exception& e) {
#pragma omp critical
      if (error.empty()) error = e.what();
    }
  }
  if (!error.empty()) throw std::runtime_error("permutation_test: " + error);

  int count = 0;
  for (const double s : nulls)
    if (s >= observed) ++count;
  const double p = (1.0 + count) / (1.0 + n_perm);
  return PermutationReport{observed, std::move(nulls), p, n_perm, seed,
                           cfg.cv.has_value()};
}

}  // namespace pda
