#include <doctest.h>

#include <cmath>

#include "fkmc/bounds.hpp"
#include "fkmc/parallel.hpp"
#include "fkmc/rng.hpp"
#include "fkmc/stats.hpp"

using namespace fkmc;

TEST_CASE("c1 and c2 constants") {
  CHECK(c1(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(c2(1.0, 1.0) ==
        doctest::Approx(2.0 * (1.0 + (std::exp(-0.5) - 1.0) / 0.5)).epsilon(1e-14));
  // frozen digits
  CHECK(std::fabs(c1(1.0, 1.0) - 0.6321205588285577) < 1e-12);
  CHECK(std::fabs(c2(1.0, 1.0) - 0.4261226388505337) < 1e-12);

  SUBCASE("limits") {
    CHECK(std::fabs(c1(1e-10, 1.0) - 1.0) < 1e-9);
    CHECK(std::fabs(c1(5.0, 0.0) - 1.0) < 1e-12);   // K -> 0
    CHECK(std::fabs(c2(5.0, 0.0) - 0.5) < 1e-12);   // K -> 0
    // the formula's own limits of t*C2: 0 for small t, 2/K for large t
    CHECK(std::fabs(1e-9 * c2(1e-9, 1.0)) < 1e-8);
    CHECK(std::fabs(1e7 * c2(1e7, 1.0) - 2.0) < 1e-4);
  }
  SUBCASE("branch continuity") {
    for (double K : {1.0, -1.0, 3.0}) {
      const double t = 1e-4 / std::fabs(K);
      CHECK(std::fabs(c1(t * (1 - 1e-9), K) - c1(t * (1 + 1e-9), K)) < 1e-10);
      CHECK(std::fabs(c2(t * (1 - 1e-9), K) - c2(t * (1 + 1e-9), K)) < 1e-10);
    }
  }
  SUBCASE("domain") {
    CHECK_THROWS_AS(c1(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(c2(-1.0, 1.0), std::domain_error);
  }
}

TEST_CASE("entropy functional is non-negative") {
  const auto g = ModelGeometry::hyperbolic(2, 1.0);
  const auto f = RadialScalarField::gaussian_bump(1.0);
  const auto grid = TimeGrid::geometric(1.0, 256, 0.9);
  EstimatorOptions o;
  o.n_paths = 4000;
  o.seed = 3;
  o.mode = PathMode::full_polar;
  for (double norm : {0.05, 0.2, 1.0})
    CHECK(entropy_functional(g, RadialScalarField::zero(), f, 1.0, 1.0, grid, o, norm) >= 0.0);
}

TEST_CASE("gibbs variational inequality holds on empirical samples") {
  // E[phi Psi] <= E[phi log phi] + log E[exp Psi] for any probability
  // measure with E[phi] = 1; checked on the empirical path measure.
  const auto g = ModelGeometry::hyperbolic(2, 1.0);
  const auto f = RadialScalarField::gaussian_bump(1.0);
  const auto vzero = RadialScalarField::zero();
  const auto grid = TimeGrid::uniform(1.0, 200);
  const int N = 5000;
  std::vector<double> y(N), psi(N);
  SimRequest req;
  req.g = &g;
  req.grid = &grid;
  req.V = &vzero;
  req.mode = PathMode::full_polar;
  req.r0 = 1.0;
  run_paths(N, 0, [&](std::size_t i, PathOut& out) {
    RngStream rng(5, i);
    simulate_forward_path(req, rng, out);
    y[i] = f.value(out.r_final);
    psi[i] = std::min(1.0, out.r_final);  // bounded test functional
  });
  const double mean_y = mean_stderr(y).mean;
  double lhs = 0.0, ent = 0.0, mgf = 0.0;
  for (int i = 0; i < N; ++i) {
    const double phi = y[static_cast<std::size_t>(i)] / mean_y;
    lhs += phi * psi[static_cast<std::size_t>(i)];
    ent += phi > 0.0 ? phi * std::log(phi) : 0.0;
    mgf += std::exp(psi[static_cast<std::size_t>(i)]);
  }
  lhs /= N;
  ent /= N;
  mgf /= N;
  CHECK(lhs <= ent + std::log(mgf) + 1e-12);
}

TEST_CASE("semigroup gradient bound is satisfied") {
  EstimatorOptions o;
  o.n_paths = 6000;
  o.seed = 7;
  o.mode = PathMode::full_polar;
  const auto f = RadialScalarField::gaussian_bump(1.0);
  SUBCASE("flat, no potential") {
    const auto g = ModelGeometry::euclidean(2);
    const auto grid = TimeGrid::geometric(1.0, 384, 0.9);
    const auto rep =
        grad_semigroup_bound(g, RadialScalarField::zero(), f, 1.0, 1.0, grid, o);
    CHECK(rep.satisfied);
    CHECK(rep.margin > 0.0);
  }
  SUBCASE("hyperbolic plane with a potential") {
    const auto g = ModelGeometry::hyperbolic(2, 1.0);
    const auto grid = TimeGrid::geometric(1.0, 384, 0.9);
    const auto rep =
        log_grad_bound(g, RadialScalarField::gaussian_bump(0.1), f, 1.0, 1.0, grid, o);
    CHECK(rep.satisfied);
    CHECK(rep.margin > 0.0);
  }
}

TEST_CASE("pole bounds") {
  EstimatorOptions o;
  o.n_paths = 6000;
  o.seed = 9;
  o.mode = PathMode::full_polar;
  const auto grid = TimeGrid::geometric(1.0, 384, 0.9);
  SUBCASE("hyperbolic 3-space, no potential") {
    const auto g = ModelGeometry::hyperbolic(3, 1.0);
    const auto rep = pole_grad_bound(g, RadialScalarField::zero(), 1.0, 1.0, grid, o);
    CHECK(rep.satisfied);
    CHECK(rep.margin > 0.0);
    const auto lrep = pole_log_grad_bound(g, RadialScalarField::zero(), 1.0, 1.0, grid, o);
    CHECK(lrep.satisfied);
    CHECK(lrep.margin > 0.0);
  }
  SUBCASE("bound grows affinely with the potential derivative bound") {
    const auto g = ModelGeometry::euclidean(2);
    const auto r0 = pole_grad_bound(g, RadialScalarField::zero(), 1.0, 1.0, grid, o);
    const auto r1 = pole_grad_bound(g, RadialScalarField::gaussian_bump(0.1), 1.0, 1.0, grid, o);
    const auto r2 = pole_grad_bound(g, RadialScalarField::gaussian_bump(0.2), 1.0, 1.0, grid, o);
    CHECK(r1.bound_value > r0.bound_value);
    CHECK(r2.bound_value > r1.bound_value);
  }
}

TEST_CASE("degenerate normalization is rejected") {
  const auto g = ModelGeometry::euclidean(2);
  const auto grid = TimeGrid::uniform(1.0, 64);
  EstimatorOptions o;
  o.n_paths = 500;
  o.seed = 11;
  o.mode = PathMode::full_polar;
  CHECK_THROWS_AS(grad_semigroup_bound(g, RadialScalarField::zero(), RadialScalarField::zero(),
                                       1.0, 1.0, grid, o),
                  precondition_error);
}
