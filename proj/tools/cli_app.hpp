#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pda::cli {

/// Parsed command line; `run` executes it and writes the artifacts.
struct RunConfig {
  std::string command;  // analyze | permtest | cv | synth | oracle
  std::string x_path;
  std::string y_path;
  std::string out_path;
  std::string out_x;
  std::string out_y;
  std::string scenario = "null_identical";
  std::string format = "json";  // json | csv

  double lambda = 0.0;
  bool use_cv = false;
  std::vector<double> grid;
  int folds = 5;
  double gamma = 0.1;
  double eta = 1.0;
  int patience = 50;
  int max_iter = 2000;
  int dual_steps = 5;
  double step0 = 0.5;
  std::optional<std::size_t> k;
  int perms = 199;
  std::uint64_t seed = 0;

  std::size_t n = 100;
  std::size_t m = 100;
  std::size_t ell = 1;
  std::size_t dim = 3;
  double factor = 4.0;
  std::vector<double> shift;
  std::vector<double> beta;  // oracle probe direction
};

int run(const RunConfig& cfg);

}  // namespace pda::cli
