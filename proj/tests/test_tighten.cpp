#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pda/tighten.hpp"
#include "pda/wasserstein.hpp"
#include "test_helpers.hpp"

using namespace pda;
using testing::make_samples;
using testing::random_samples;
using testing::random_unit;

TEST_CASE("project_half_ball closed forms") {
  const Vector inside = project_half_ball({0.3, 0.4});
  CHECK(inside[0] == 0.3);
  CHECK(inside[1] == 0.4);

  const Vector rescaled = project_half_ball({3.0, 4.0});
  CHECK(rescaled[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(rescaled[1] == doctest::Approx(0.8).epsilon(1e-15));

  const Vector flipped = project_half_ball({-3.0, 4.0});
  CHECK(flipped[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(flipped[1] == doctest::Approx(-0.8).epsilon(1e-15));

  const Vector zero = project_half_ball({0.0, 0.0});
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);
}

TEST_CASE("project_half_ball idempotence and objective invariance") {
  RandomStream rs(127);
  const SampleSet x = random_samples(6, 3, -2.0, 2.0, rs);
  const SampleSet y = random_samples(6, 3, -2.0, 2.0, rs);
  for (int rep = 0; rep < 10; ++rep) {
    Vector v(3);
    for (double& t : v) t = rs.next_uniform(-3.0, 3.0);
    const Vector once = project_half_ball(v);
    const Vector twice = project_half_ball(once);
    for (std::size_t c = 0; c < 3; ++c) CHECK(once[c] == twice[c]);
    CHECK(norm2(once) <= 1.0 + 1e-9);

    Vector clipped = v;
    const double nrm = norm2(v);
    if (nrm > 1.0)
      for (double& t : clipped) t /= nrm;
    const double j_proj = objective(x, y, once);
    const double j_clip = objective(x, y, clipped);
    CHECK(std::fabs(j_proj - j_clip) <= 1e-10 * std::max(1.0, j_clip));
  }
}

TEST_CASE("truncate_topk selection rules") {
  const Vector full = truncate_topk({0.9, -0.5, 0.1}, 3);
  CHECK(full[0] == 0.9);
  CHECK(full[1] == -0.5);
  CHECK(full[2] == 0.1);

  const Vector two = truncate_topk({0.9, -0.5, 0.1}, 2);
  CHECK(two[0] == 0.9);
  CHECK(two[1] == -0.5);
  CHECK(two[2] == 0.0);

  const Vector tie = truncate_topk({0.5, 0.5, 0.5}, 1);
  CHECK(tie[0] == 0.5);
  CHECK(tie[1] == 0.0);
  CHECK(tie[2] == 0.0);

  CHECK_THROWS_AS(truncate_topk({1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(truncate_topk({1.0}, 2), std::invalid_argument);
}

TEST_CASE("truncate_topk is idempotent") {
  RandomStream rs(131);
  for (int rep = 0; rep < 20; ++rep) {
    Vector v(6);
    for (double& t : v) t = rs.next_uniform(-1.0, 1.0);
    const std::size_t k = 1 + rs.next_below(6);
    const Vector once = truncate_topk(v, k);
    const Vector twice = truncate_topk(once, k);
    for (std::size_t c = 0; c < 6; ++c) CHECK(once[c] == twice[c]);
  }
}

TEST_CASE("sorted_gradient_pass matches the cold path bit for bit") {
  RandomStream rs(137);
  const SampleSet x = random_samples(30, 4, -2.0, 2.0, rs);
  const SampleSet y = random_samples(24, 4, -2.0, 2.0, rs);
  Vector beta = random_unit(4, rs);

  SortCache cache;
  const auto cold = sorted_gradient_pass(x, y, beta, &cache);
  // warm pass on the identical direction: zero swaps, identical output
  const auto warm = sorted_gradient_pass(x, y, beta, &cache);
  CHECK(cold.objective == warm.objective);
  for (std::size_t c = 0; c < 4; ++c) CHECK(cold.gradient[c] == warm.gradient[c]);

  // a random walk of small steps: every cached pass equals a cold pass
  for (int step = 0; step < 50; ++step) {
    for (double& t : beta) t += rs.next_uniform(-0.02, 0.02);
    const auto cached = sorted_gradient_pass(x, y, beta, &cache);
    const auto fresh = sorted_gradient_pass(x, y, beta, nullptr);
    CHECK(std::fabs(cached.objective - fresh.objective) <= 1e-12);
    for (std::size_t c = 0; c < 4; ++c)
      CHECK(std::fabs(cached.gradient[c] - fresh.gradient[c]) <= 1e-12);
  }
}

TEST_CASE("gradient and sorted pass agree") {
  RandomStream rs(139);
  const SampleSet x = random_samples(9, 3, -2.0, 2.0, rs);
  const SampleSet y = random_samples(7, 3, -2.0, 2.0, rs);
  Vector beta = random_unit(3, rs);
  canonical_sign(beta);  // objective() evaluates under the sign convention
  const Vector g = gradient(x, y, beta);
  const auto pass = sorted_gradient_pass(x, y, beta, nullptr);
  for (std::size_t c = 0; c < 3; ++c) CHECK(g[c] == pass.gradient[c]);
  CHECK(pass.objective == objective(x, y, beta));
}

TEST_CASE("tighten holds a point-mass optimum fixed") {
  Matrix zeros(5, 2);
  Matrix mus(5, 2);
  for (std::size_t i = 0; i < 5; ++i) mus(i, 0) = 1.0;
  const SampleSet x{std::move(zeros)};
  const SampleSet y{std::move(mus)};

  TightenConfig cfg;
  cfg.k = 2;
  const Vector beta0{1.0, 0.0};
  const TightenResult res = tighten(x, y, beta0, cfg);
  CHECK(std::fabs(res.objective - 1.0) <= 1e-9);
  CHECK(std::fabs(res.beta[0] - 1.0) <= 1e-9);
}

TEST_CASE("tighten on identical samples returns the start") {
  RandomStream rs(149);
  const SampleSet x = random_samples(8, 3, -2.0, 2.0, rs);
  const SampleSet y{Matrix(x.matrix())};
  const Vector beta0 = random_unit(3, rs);

  TightenConfig cfg;
  cfg.k = 3;
  const TightenResult res = tighten(x, y, beta0, cfg);
  CHECK(res.objective == 0.0);
  Vector expected = beta0;
  canonical_sign(expected);
  for (std::size_t c = 0; c < 3; ++c) CHECK(res.beta[c] == expected[c]);
}

TEST_CASE("tighten validates its inputs") {
  RandomStream rs(151);
  const SampleSet x = random_samples(4, 2, -1.0, 1.0, rs);
  const SampleSet y = random_samples(4, 2, -1.0, 1.0, rs);
  TightenConfig cfg;
  cfg.k = 2;
  CHECK_THROWS_AS(tighten(x, y, Vector{0.0, 0.0}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(tighten(x, y, Vector{1.0, 0.0, 0.0}, cfg), std::invalid_argument);
  cfg.k = 5;
  CHECK_THROWS_AS(tighten(x, y, Vector{1.0, 0.0}, cfg), std::invalid_argument);
}

TEST_CASE("tighten output is feasible and never below the start") {
  RandomStream rs(157);
  for (int rep = 0; rep < 6; ++rep) {
    const SampleSet x = random_samples(20, 4, -2.0, 2.0, rs);
    const SampleSet y = random_samples(18, 4, -2.0, 2.0, rs);
    Vector beta0 = random_unit(4, rs);
    canonical_sign(beta0);

    TightenConfig cfg;
    cfg.k = 1 + rs.next_below(4);
    cfg.max_iter = 400;
    const TightenResult res = tighten(x, y, beta0, cfg);

    CHECK(norm2(res.beta.coords()) <= 1.0 + 1e-9);
    std::size_t nonzero = 0;
    for (const double v : res.beta.coords())
      if (v != 0.0) ++nonzero;
    CHECK(nonzero <= cfg.k);

    // the projected start is the first candidate, so the result cannot be
    // worse than it
    Vector start = truncate_topk(project_half_ball(beta0), cfg.k);
    canonical_sign(start);
    CHECK(res.objective >= objective(x, y, start) - 1e-12);
  }
}

TEST_CASE("tighten improves on a poor start") {
  Matrix zeros(6, 3);
  Matrix mus(6, 3);
  for (std::size_t i = 0; i < 6; ++i) mus(i, 0) = 2.0;
  const SampleSet x{std::move(zeros)};
  const SampleSet y{std::move(mus)};

  TightenConfig cfg;
  cfg.k = 3;
  const Vector skew{0.1, 0.7, 0.7};  // mostly orthogonal to the shift
  const TightenResult res = tighten(x, y, skew, cfg);
  CHECK(res.objective > objective(x, y, skew));
  CHECK(std::fabs(res.beta[0]) >= 0.99);
}
