#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "cli_app.hpp"
#include "pda/version.hpp"

namespace {

void add_solver_flags(CLI::App* cmd, pda::cli::RunConfig& cfg) {
  cmd->add_option("--lambda", cfg.lambda, "l1 penalty on the relaxed matrix");
  cmd->add_option("--gamma", cfg.gamma, "matrix step scale");
  cmd->add_option("--eta", cfg.eta, "dual step scale");
  cmd->add_option("--patience", cfg.patience, "iterations without improvement");
  cmd->add_option("--max-iter", cfg.max_iter, "iteration cap");
  cmd->add_option("--dual-steps", cfg.dual_steps, "dual passes per matrix update");
  cmd->add_option("--step0", cfg.step0, "tightening step scale");
  cmd->add_option("--k", cfg.k, "force the sparsity level of the tightening");
}

void add_cv_flags(CLI::App* cmd, pda::cli::RunConfig& cfg) {
  cmd->add_option("--grid", cfg.grid, "lambda grid (comma separated)")->delimiter(',');
  cmd->add_option("--folds", cfg.folds, "cross-validation folds");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"principal differences analysis"};
  app.set_version_flag("--version", pda::kVersion);
  app.require_subcommand(1);

  pda::cli::RunConfig cfg;
  app.add_option("--seed", cfg.seed, "random seed (echoed in outputs)");
  app.add_option("--format", cfg.format, "output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* analyze = app.add_subcommand("analyze", "fit the divergence-maximizing projection");
  analyze->add_option("--x", cfg.x_path, "first population CSV")->required();
  analyze->add_option("--y", cfg.y_path, "second population CSV")->required();
  analyze->add_option("--out", cfg.out_path, "output file");
  analyze->add_flag("--cv", cfg.use_cv, "select lambda by cross-validation");
  add_solver_flags(analyze, cfg);
  add_cv_flags(analyze, cfg);

  auto* permtest = app.add_subcommand("permtest", "permutation test of distribution equality");
  permtest->add_option("--x", cfg.x_path, "first population CSV")->required();
  permtest->add_option("--y", cfg.y_path, "second population CSV")->required();
  permtest->add_option("--out", cfg.out_path, "output file");
  permtest->add_option("--perms", cfg.perms, "number of permutations");
  permtest->add_flag("--cv", cfg.use_cv, "re-select lambda inside each permutation");
  add_solver_flags(permtest, cfg);
  add_cv_flags(permtest, cfg);

  auto* cv = app.add_subcommand("cv", "cross-validate the penalty strength");
  cv->add_option("--x", cfg.x_path, "first population CSV")->required();
  cv->add_option("--y", cfg.y_path, "second population CSV")->required();
  cv->add_option("--out", cfg.out_path, "output file");
  add_solver_flags(cv, cfg);
  add_cv_flags(cv, cfg);

  auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
  synth
      ->add_option("--scenario", cfg.scenario,
                   "figure1a | wishart_blocks | mean_shift | variance_shift | null_identical")
      ->required();
  synth->add_option("--n", cfg.n, "rows in the first population");
  synth->add_option("--m", cfg.m, "rows in the second population");
  synth->add_option("--ell", cfg.ell, "block count (wishart_blocks)");
  synth->add_option("--d", cfg.dim, "dimension (mean/variance shift, null)");
  synth->add_option("--shift", cfg.shift, "mean of the second population")->delimiter(',');
  synth->add_option("--factor", cfg.factor, "first marginal variance factor");
  synth->add_option("--out-x", cfg.out_x, "output CSV for the first population")->required();
  synth->add_option("--out-y", cfg.out_y, "output CSV for the second population")->required();

  auto* oracle = app.add_subcommand("oracle", "brute-force references for cross-checking");
  oracle->add_option("--x", cfg.x_path, "first population CSV")->required();
  oracle->add_option("--y", cfg.y_path, "second population CSV")->required();
  oracle->add_option("--beta", cfg.beta, "probe direction (default uniform)")->delimiter(',');
  oracle->add_option("--out", cfg.out_path, "output file");

  CLI11_PARSE(app, argc, argv);

  for (auto* cmd : {analyze, permtest, cv, synth, oracle})
    if (cmd->parsed()) cfg.command = cmd->get_name();

  try {
    return pda::cli::run(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
