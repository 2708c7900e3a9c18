#include "cli_app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "pda/csv.hpp"
#include "pda/inference.hpp"
#include "pda/oracle.hpp"
#include "pda/synth.hpp"
#include "pda/version.hpp"
#include "pda/wasserstein.hpp"

namespace pda::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

json config_echo(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["format"] = cfg.format;
  j["lambda"] = cfg.lambda;
  j["cv"] = cfg.use_cv;
  j["grid"] = cfg.grid;
  j["folds"] = cfg.folds;
  j["gamma"] = cfg.gamma;
  j["eta"] = cfg.eta;
  j["patience"] = cfg.patience;
  j["max_iter"] = cfg.max_iter;
  j["dual_steps"] = cfg.dual_steps;
  j["step0"] = cfg.step0;
  if (cfg.k.has_value()) j["k"] = *cfg.k;
  j["perms"] = cfg.perms;
  j["scenario"] = cfg.scenario;
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  j["ell"] = cfg.ell;
  j["dim"] = cfg.dim;
  j["factor"] = cfg.factor;
  j["shift"] = cfg.shift;
  return j;
}

json make_meta(const RunConfig& cfg, const Clock::time_point& start) {
  json meta;
  meta["config"] = config_echo(cfg);
  meta["seed"] = cfg.seed;
  meta["version"] = kVersion;
  meta["generator"] = kGeneratorName;
  meta["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start)
          .count();
  return meta;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

PipelineConfig pipeline_from(const RunConfig& cfg, const SampleSet& x,
                             const SampleSet& y) {
  PipelineConfig p;
  p.relax.lambda = cfg.lambda;
  p.relax.gamma = cfg.gamma;
  p.relax.eta = cfg.eta;
  p.relax.patience = cfg.patience;
  p.relax.max_iter = cfg.max_iter;
  p.relax.dual_steps_per_b = cfg.dual_steps;
  p.relax.seed = cfg.seed;
  p.tighten.step0 = cfg.step0;
  p.tighten.k_override = cfg.k;
  if (cfg.use_cv) {
    CvConfig cv;
    cv.grid = cfg.grid.empty() ? default_lambda_grid(x, y) : cfg.grid;
    cv.folds = cfg.folds;
    p.cv = std::move(cv);
  }
  return p;
}

std::vector<std::size_t> order_by_weight(std::span<const double> beta) {
  std::vector<std::size_t> order(beta.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(beta[a]) > std::fabs(beta[b]);
  });
  return order;
}

void print_weight_table(std::span<const double> beta) {
  const auto order = order_by_weight(beta);
  const std::size_t show = std::min<std::size_t>(beta.size(), 25);
  std::printf("%-10s %s\n", "feature", "weight");
  for (std::size_t r = 0; r < show; ++r)
    std::printf("%-10zu % .6g\n", order[r], beta[order[r]]);
  if (show < beta.size())
    std::printf("... (%zu more features)\n", beta.size() - show);
}

json analysis_json(const AnalysisResult& res) {
  json j;
  j["beta"] = res.beta.coords();
  j["divergence"] = res.divergence;
  j["k_effective"] = res.k_effective;
  j["lambda"] = res.lambda_used;
  return j;
}

int run_analyze(const RunConfig& cfg, const Clock::time_point& start) {
  const SampleSet x = load_samples(cfg.x_path);
  const SampleSet y = load_samples(cfg.y_path);
  const PipelineConfig pipeline = pipeline_from(cfg, x, y);
  AnalysisResult res = analyze_with_config(x, y, pipeline, cfg.seed);

  if (pipeline.cv.has_value())
    std::printf("lambda selected by cross-validation: %.6g\n", res.lambda_used);
  std::printf("divergence %.10g  k_effective %zu\n", res.divergence, res.k_effective);
  print_weight_table(res.beta.span());

  if (!cfg.out_path.empty()) {
    if (cfg.format == "csv") {
      std::string text = "feature,weight\n";
      char buf[80];
      for (const std::size_t f : order_by_weight(res.beta.span())) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", f, res.beta[f]);
        text += buf;
      }
      write_text(cfg.out_path, text);
    } else {
      json j = analysis_json(res);
      j["meta"] = make_meta(cfg, start);
      const auto& trace = res.solver_trace.iterations;
      j["meta"]["solver"] = {
          {"iterations", trace.size()},
          {"best_dual_value", trace.empty() ? 0.0 : trace.back().best_value}};
      write_json(cfg.out_path, j);
    }
  }
  return 0;
}

int run_permtest(const RunConfig& cfg, const Clock::time_point& start) {
  const SampleSet x = load_samples(cfg.x_path);
  const SampleSet y = load_samples(cfg.y_path);
  const PipelineConfig pipeline = pipeline_from(cfg, x, y);
  const PermutationReport report = permutation_test(x, y, pipeline, cfg.perms, cfg.seed);

  std::printf("observed %.10g  p-value %.6g  (%d permutations, %s null)\n",
              report.observed_stat, report.p_value, report.n_permutations,
              report.lambda_reselected ? "cv-reselected" : "fixed-lambda");

  if (!cfg.out_path.empty()) {
    if (cfg.format == "csv") {
      std::string text = "null_stat\n";
      char buf[48];
      for (const double s : report.null_stats) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", s);
        text += buf;
      }
      write_text(cfg.out_path, text);
    } else {
      json j;
      j["observed_stat"] = report.observed_stat;
      j["p_value"] = report.p_value;
      j["null_stats"] = report.null_stats;
      j["n_permutations"] = report.n_permutations;
      j["lambda"] = cfg.lambda;
      j["meta"] = make_meta(cfg, start);
      j["meta"]["null_mode"] =
          report.lambda_reselected ? "cv-reselected" : "fixed-lambda";
      write_json(cfg.out_path, j);
    }
  }
  return 0;
}

int run_cv(const RunConfig& cfg, const Clock::time_point& start) {
  const SampleSet x = load_samples(cfg.x_path);
  const SampleSet y = load_samples(cfg.y_path);
  RunConfig with_cv = cfg;
  with_cv.use_cv = true;
  const PipelineConfig pipeline = pipeline_from(with_cv, x, y);
  const CvResult res = cross_validate_lambda(x, y, pipeline, cfg.seed);

  std::printf("lambda_star %.6g\n", res.lambda_star);
  for (const auto& row : res.table)
    std::printf("  lambda %.6g  mean held-out divergence %.6g\n", row.lambda,
                row.mean_divergence);

  if (!cfg.out_path.empty()) {
    if (cfg.format == "csv") {
      std::string text = "lambda,mean_divergence";
      for (std::size_t f = 0; f < res.table.front().fold_divergences.size(); ++f)
        text += ",fold_" + std::to_string(f);
      text += "\n";
      char buf[48];
      for (const auto& row : res.table) {
        std::snprintf(buf, sizeof(buf), "%.17g", row.lambda);
        text += buf;
        std::snprintf(buf, sizeof(buf), ",%.17g", row.mean_divergence);
        text += buf;
        for (const double v : row.fold_divergences) {
          std::snprintf(buf, sizeof(buf), ",%.17g", v);
          text += buf;
        }
        text += "\n";
      }
      write_text(cfg.out_path, text);
    } else {
      json j;
      j["lambda"] = res.lambda_star;
      j["cv_table"] = json::array();
      for (const auto& row : res.table)
        j["cv_table"].push_back({{"lambda", row.lambda},
                                 {"mean_divergence", row.mean_divergence},
                                 {"fold_divergences", row.fold_divergences}});
      j["meta"] = make_meta(cfg, start);
      write_json(cfg.out_path, j);
    }
  }
  return 0;
}

int run_synth(const RunConfig& cfg) {
  ScenarioSpec spec;
  spec.kind = scenario_kind_from_string(cfg.scenario);
  spec.n = cfg.n;
  spec.m = cfg.m;
  spec.seed = cfg.seed;
  spec.ell = cfg.ell;
  spec.dim = cfg.dim;
  spec.shift = cfg.shift;
  spec.variance_factor = cfg.factor;
  const auto [x, y] = make_scenario(spec);
  if (cfg.out_x.empty() || cfg.out_y.empty())
    throw std::runtime_error("synth: --out-x and --out-y are required");
  write_csv(cfg.out_x, x.matrix());
  write_csv(cfg.out_y, y.matrix());
  std::printf("wrote %zux%zu to %s and %zux%zu to %s\n", x.size(), x.dim(),
              cfg.out_x.c_str(), y.size(), y.dim(), cfg.out_y.c_str());
  if (spec.kind == ScenarioKind::kWishartBlocks)
    std::printf("differing features: 0,1,2\n");
  return 0;
}

int run_oracle(const RunConfig& cfg, const Clock::time_point& start) {
  const SampleSet x = load_samples(cfg.x_path);
  const SampleSet y = load_samples(cfg.y_path);
  const std::size_t d = x.dim();
  Vector beta = cfg.beta;
  if (beta.empty())
    beta.assign(d, std::sqrt(static_cast<double>(d)) / static_cast<double>(d));
  if (beta.size() != d) throw std::runtime_error("oracle: beta length mismatch");

  const Vector px = project(x, beta);
  const Vector py = project(y, beta);
  const double sorted_value = wasserstein1d(px, py);

  Matrix costs(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double diff = px[i] - py[j];
      costs(i, j) = diff * diff;
    }
  const double lp_value = oracle::transport_lp(costs).value;

  const Vector grad = gradient(x, y, beta);
  const Vector grad_fd = oracle::finite_difference_gradient(x, y, beta);
  double err = 0.0;
  for (std::size_t c = 0; c < d; ++c) err += (grad[c] - grad_fd[c]) * (grad[c] - grad_fd[c]);
  const double denom = std::max(norm2(grad), 1e-300);
  const double rel_err = std::sqrt(err) / denom;

  std::printf("sorted %.12g  lp %.12g  |diff| %.3g  gradient rel err %.3g\n",
              sorted_value, lp_value, std::fabs(sorted_value - lp_value), rel_err);

  if (!cfg.out_path.empty()) {
    json j;
    j["beta"] = beta;
    j["wasserstein_sorted"] = sorted_value;
    j["wasserstein_lp"] = lp_value;
    j["gradient"] = grad;
    j["gradient_fd"] = grad_fd;
    j["gradient_rel_err"] = rel_err;
    j["meta"] = make_meta(cfg, start);
    write_json(cfg.out_path, j);
  }
  return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
  const auto start = Clock::now();
  if (cfg.command == "analyze") return run_analyze(cfg, start);
  if (cfg.command == "permtest") return run_permtest(cfg, start);
  if (cfg.command == "cv") return run_cv(cfg, start);
  if (cfg.command == "synth") return run_synth(cfg);
  if (cfg.command == "oracle") return run_oracle(cfg, start);
  throw std::runtime_error("unknown command: " + cfg.command);
}

}  // namespace pda::cli
