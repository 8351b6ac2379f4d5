#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "advattr/pareto.hpp"
#include "advattr/rng.hpp"

using namespace advattr;

namespace {

double objective(const Vec& gs, const Vec& ga, double w1) {
  Vec d(gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i) d[i] = w1 * gs[i] + (1.0 - w1) * ga[i];
  return oracle::dot(d, d);
}

}  // namespace

TEST_CASE("gram") {
  const Vec e1{1, 0}, e2{0, 1};
  const Gram2 g = gram({e1, e2});
  CHECK(g[0][0] == 1.0);
  CHECK(g[0][1] == 0.0);
  CHECK(g[1][1] == 1.0);
  const Vec v{1, 2, 3};
  const Gram2 same = gram({v, v});
  for (const auto& row : same) {
    for (double x : row) CHECK(x == 14.0);
  }
  Rng rng(1);
  const Vec a = gaussian_vector(50, 1.0, rng);
  const Vec b = gaussian_vector(50, 1.0, rng);
  const Gram2 r = gram({a, b});
  CHECK(r[0][1] == r[1][0]);
  CHECK(r[0][1] == doctest::Approx(oracle::dot(a, b)).epsilon(1e-13));
  CHECK(r[1][1] == doctest::Approx(oracle::dot(b, b)).epsilon(1e-13));
  const Vec shorter{1};
  CHECK_THROWS_AS(gram({a, shorter}), ShapeError);
}

TEST_CASE("solve_equality_kkt") {
  const Vec e1{1, 0}, e2{0, 1};
  auto s = solve_equality_kkt(GradientPair{e1, e2}, 0.0, 0.0);
  REQUIRE(s);
  CHECK(s->w1 == doctest::Approx(0.5));
  CHECK(s->w2 == doctest::Approx(0.5));

  // ||gs|| = 2, ||ga|| = 1, orthogonal: minimize 4 w^2 + (1 - w)^2 -> w = 1/5
  const Vec gs{2, 0}, ga{0, 1};
  s = solve_equality_kkt(GradientPair{gs, ga}, 0.0, 0.0);
  REQUIRE(s);
  CHECK(s->w1 == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(s->w2 == doctest::Approx(0.8).epsilon(1e-12));
  double grid_w = 0.0;
  oracle::grid_min_objective(gs, ga, 0.0, 0.0, 1e-4, &grid_w);
  CHECK(std::fabs(grid_w - 0.2) < 1e-4);
  // stationarity: G G^T w + lambda e = 0
  CHECK(4.0 * s->w1 + s->lambda == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(1.0 * s->w2 + s->lambda == doctest::Approx(0.0).epsilon(1e-12));

  const Vec g{1, -2, 0.5};
  CHECK_FALSE(solve_equality_kkt(GradientPair{g, g}, 0.1, 0.1).has_value());
}

TEST_CASE("project_simplex") {
  auto p = project_simplex(-0.2, 1.2, 1.0);
  CHECK(p.first == doctest::Approx(0.0));
  CHECK(p.second == doctest::Approx(1.0));
  p = project_simplex(0.3, 0.7, 1.0);
  CHECK(p.first == doctest::Approx(0.3));
  CHECK(p.second == doctest::Approx(0.7));
  p = project_simplex(1.5, -0.5, 1.0);
  CHECK(p.first == doctest::Approx(1.0));
  CHECK(p.second == doctest::Approx(0.0));
  p = project_simplex(0.6, 0.6, 0.8);
  CHECK(p.first == doctest::Approx(0.4));
  CHECK_THROWS(project_simplex(0.5, 0.5, 0.0));
}

TEST_CASE("pareto_weights worked examples") {
  const Vec g{1.0, 2.0, -1.0};
  const Vec zero(3, 0.0);
  auto w = pareto_weights(GradientPair{g, zero}, 0.1, 0.1);
  CHECK(w.stealthy == doctest::Approx(0.1));
  CHECK(w.adversarial == doctest::Approx(0.9));

  const Vec neg{-1.0, -2.0, 1.0};
  w = pareto_weights(GradientPair{g, neg}, 0.1, 0.1);
  CHECK(w.stealthy == doctest::Approx(0.5));
  CHECK(w.adversarial == doctest::Approx(0.5));
  const auto b = brute_force_weights(GradientPair{g, neg}, 0.1, 0.1, 1e-4);
  CHECK(std::fabs(b.stealthy - 0.5) <= 1e-4);

  // identical gradients: every feasible point is optimal, midpoint fallback
  w = pareto_weights(GradientPair{g, g}, 0.1, 0.3);
  CHECK(w.stealthy == doctest::Approx(0.4));
  // both zero
  w = pareto_weights(GradientPair{zero, zero}, 0.2, 0.2);
  CHECK(w.stealthy == doctest::Approx(0.5));
  CHECK_THROWS(pareto_weights(GradientPair{g, g}, 0.6, 0.5));
}

TEST_CASE("pareto_weights against the grid oracle on random pairs") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim(2, 60);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = dim(rng);
    Rng g(static_cast<std::uint64_t>(trial));
    const Vec gs = gaussian_vector(n, std::pow(10.0, 2.0 * unit(rng) - 1.0), g);
    const Vec ga = gaussian_vector(n, std::pow(10.0, 2.0 * unit(rng) - 1.0), g);
    const double c1 = 0.45 * unit(rng);
    const double c2 = 0.45 * unit(rng);
    const auto w = pareto_weights(GradientPair{gs, ga}, c1, c2);
    CHECK(w.on_constrained_simplex(c1, c2));
    CHECK(std::fabs(w.stealthy + w.adversarial - 1.0) < 1e-9);
    const double best = oracle::grid_min_objective(gs, ga, c1, c2, 1e-3);
    CHECK(objective(gs, ga, w.stealthy) <= best + 1e-9);
    if (c1 <= 0.5 && c2 <= 0.5) CHECK(objective(gs, ga, w.stealthy) <= objective(gs, ga, 0.5) + 1e-12);

    // scale invariance of the minimizer
    const double lambda = 0.01 + 100.0 * unit(rng);
    Vec sgs = gs, sga = ga;
    for (auto& x : sgs) x *= lambda;
    for (auto& x : sga) x *= lambda;
    const auto ws = pareto_weights(GradientPair{sgs, sga}, c1, c2);
    CHECK(std::fabs(ws.stealthy - w.stealthy) < 1e-9);

    // cross-check with the library's brute force
    const auto b = brute_force_weights(GradientPair{gs, ga}, c1, c2, 1e-4);
    CHECK(pareto_objective(GradientPair{gs, ga}, w) <= pareto_objective(GradientPair{gs, ga}, b) + 1e-9);
  }
}

TEST_CASE("interior solutions are stationary along the simplex") {
  Rng rng(8);
  int interior = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Vec gs = gaussian_vector(20, 1.0, rng);
    const Vec ga = gaussian_vector(20, 1.0, rng);
    const auto w = pareto_weights(GradientPair{gs, ga}, 0.05, 0.05);
    if (w.stealthy <= 0.05 + 1e-9 || w.adversarial <= 0.05 + 1e-9) continue;
    ++interior;
    Vec d(20), diff(20);
    for (std::size_t i = 0; i < 20; ++i) {
      d[i] = w.stealthy * gs[i] + w.adversarial * ga[i];
      diff[i] = gs[i] - ga[i];
    }
    CHECK(std::fabs(oracle::dot(d, diff)) < 1e-6 * oracle::norm(diff) * oracle::norm(d) + 1e-12);
  }
  CHECK(interior > 50);
}

TEST_CASE("brute_force_weights contract") {
  const Vec gs{1, 0}, ga{0, 1};
  const auto b = brute_force_weights(GradientPair{gs, ga}, 0.1, 0.1, 1e-4);
  CHECK(std::fabs(b.stealthy - 0.5) <= 1e-4);
  CHECK_THROWS(brute_force_weights(GradientPair{gs, ga}, 0.1, 0.1, 0.0));
  CHECK_THROWS(brute_force_weights(GradientPair{gs, ga}, 0.6, 0.6, 1e-3));
}

TEST_CASE("TradeoffWeights invariants") {
  CHECK_NOTHROW((TradeoffWeights{0.3, 0.7}.validate_simplex()));
  CHECK_THROWS((TradeoffWeights{0.3, 0.6}.validate_simplex()));
  CHECK_THROWS((TradeoffWeights{-0.1, 1.1}.validate_simplex()));
  CHECK((TradeoffWeights{0.1, 0.9}.on_constrained_simplex(0.1, 0.1)));
  CHECK_FALSE((TradeoffWeights{0.05, 0.95}.on_constrained_simplex(0.1, 0.1)));
}
