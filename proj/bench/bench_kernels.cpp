// Timing comparison of the blocked (OpenMP) kernels against the serial
// reference implementations, with a result cross-check.

#include <chrono>
#include <cstdio>

#include "pda/kernels.hpp"
#include "pda/random.hpp"
#include "pda/relax.hpp"
#include "pda/synth.hpp"
#include "pda/wasserstein.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(const Clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

pda::Matrix random_feasible(std::size_t d, pda::RandomStream& rs) {
  pda::Matrix b(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      b(i, j) = rs.next_uniform(-1.0, 1.0);
      b(j, i) = b(i, j);
    }
  return pda::project_to_feasible(b, 0.0, 0.0).entries;
}

void bench_dual_pass(std::size_t n, std::size_t d, int reps) {
  pda::RandomStream rs(42);
  pda::ScenarioSpec spec;
  spec.kind = pda::ScenarioKind::kNullIdentical;
  spec.n = n;
  spec.m = n;
  spec.dim = d;
  spec.seed = 9;
  const auto [x, y] = pda::make_scenario(spec);
  const pda::Matrix b = random_feasible(d, rs);
  const pda::Vector u(n, 0.05);
  const pda::Vector v(n, 0.05);

  auto t0 = Clock::now();
  pda::kernels::DualPass blocked;
  for (int r = 0; r < reps; ++r) blocked = pda::kernels::dual_pass(x, y, b, u, v, true);
  const double blocked_ms = ms_since(t0) / reps;

  t0 = Clock::now();
  pda::kernels::DualPass reference;
  for (int r = 0; r < reps; ++r)
    reference = pda::kernels::reference_dual_pass(x, y, b, u, v, true);
  const double reference_ms = ms_since(t0) / reps;

  const double diff = pda::max_abs_diff(blocked.scatter, reference.scatter);
  std::printf("dual_pass   n=%-5zu d=%-3zu  blocked %8.3f ms  reference %8.3f ms  "
              "speedup %5.2fx  max scatter diff %.2e\n",
              n, d, blocked_ms, reference_ms, reference_ms / blocked_ms, diff);
}

void bench_gradient(std::size_t n, std::size_t d, int reps) {
  pda::ScenarioSpec spec;
  spec.kind = pda::ScenarioKind::kNullIdentical;
  spec.n = n;
  spec.m = n;
  spec.dim = d;
  spec.seed = 10;
  const auto [x, y] = pda::make_scenario(spec);
  pda::Vector beta(d, 1.0 / std::sqrt(static_cast<double>(d)));

  auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    const pda::Vector g = pda::gradient(x, y, beta);
    beta[0] += g[0] * 1e-12;  // keep the call observable
  }
  std::printf("gradient    n=%-5zu d=%-3zu  %8.3f ms per call\n", n, d,
              ms_since(t0) / reps);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled (serial build)\n");
#endif
  bench_dual_pass(200, 10, 20);
  bench_dual_pass(500, 10, 10);
  bench_dual_pass(1000, 3, 10);
  bench_dual_pass(1000, 30, 3);
  bench_gradient(1000, 10, 50);
  bench_gradient(5000, 10, 10);
  return 0;
}
