#include <doctest.h>

#include <cmath>

#include "fkmc/geometry.hpp"
#include "fkmc/reference.hpp"

using namespace fkmc;

TEST_CASE("euclidean kernel") {
  const auto rk = euclidean_reference(1);
  CHECK(rk.value(0.0, 1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(reference_normalization(rk, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  const auto rk2 = euclidean_reference(2);
  // derivative oracle: -(r/t) (2 pi t)^{-1} e^{-r^2/2t}
  const double expect = -1.0 / (2.0 * kPi) * std::exp(-0.5);
  CHECK(rk2.derivative(1.0, 1.0) == doctest::Approx(expect).epsilon(1e-13));
  CHECK_THROWS_AS(rk2.value(1.0, -1.0), std::domain_error);
}

TEST_CASE("hyperbolic 3-space kernel") {
  const auto rk = hyperbolic3_reference();
  for (double t : {0.25, 1.0, 2.0})
    CHECK(reference_normalization(rk, t) == doctest::Approx(1.0).epsilon(1e-6));

  // closes against the curvature-corrected gaussian prefactor exactly
  const auto g = ModelGeometry::hyperbolic(3, 1.0);
  for (double r : {0.3, 1.0, 2.5})
    for (double t : {0.5, 1.0}) {
      const double lhs = rk.value(r, t);
      const double rhs = g.gauss_kernel_k(r, t) * std::exp(-0.5 * t);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }

  // solves the radial heat equation: dp/dt = (1/2)(p'' + 2 coth r p');
  // the residual is measured against the kernel scale since dp/dt crosses
  // zero inside the grid
  double worst = 0.0;
  for (double r : {0.7, 1.0, 1.5, 2.0})
    for (double t : {0.6, 1.0, 1.4}) {
      const double dr = 1e-3, dt = 1e-3;
      const double pt = (rk.value(r, t + dt) - rk.value(r, t - dt)) / (2.0 * dt);
      const double pr = (rk.value(r + dr, t) - rk.value(r - dr, t)) / (2.0 * dr);
      const double prr =
          (rk.value(r + dr, t) - 2.0 * rk.value(r, t) + rk.value(r - dr, t)) / (dr * dr);
      const double rhs = 0.5 * (prr + 2.0 / std::tanh(r) * pr);
      const double scale = std::max(std::fabs(pt), rk.value(r, t) / t);
      worst = std::max(worst, std::fabs(pt - rhs) / scale);
    }
  CHECK(worst < 1e-4);

  // small-time limit: p / gaussian -> J^{-1/2}
  const double ratio = rk.value(0.5, 1e-3) /
                       (std::pow(2.0 * kPi * 1e-3, -1.5) * std::exp(-0.25 / 2e-3));
  CHECK(ratio == doctest::Approx(0.5 / std::sinh(0.5)).epsilon(0.01));
}

TEST_CASE("hyperbolic plane kernel") {
  const auto rk = hyperbolic2_reference();
  for (double t : {0.5, 1.0})
    CHECK(reference_normalization(rk, t) == doctest::Approx(1.0).epsilon(1e-6));

  // small-time gaussian limit
  const double ratio =
      rk.value(0.5, 1e-3) / (std::pow(2.0 * kPi * 1e-3, -1.0) * std::exp(-0.25 / 2e-3));
  CHECK(ratio == doctest::Approx(std::sqrt(0.5 / std::sinh(0.5))).epsilon(0.01));

  // positive and decreasing in r at fixed t
  double prev = rk.value(0.0, 1.0);
  CHECK(prev > 0.0);
  for (double r = 0.25; r < 4.0; r += 0.25) {
    const double cur = rk.value(r, 1.0);
    CHECK(cur > 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("generator convention conversion round trips") {
  for (int n : {1, 2, 3}) {
    const auto rk = euclidean_reference(n);
    const RadialKernel full = full_laplacian_from_half(rk.value);
    const RadialKernel back = half_laplacian_from_full(full);
    for (double r : {0.0, 0.7, 2.0})
      for (double t : {0.3, 1.0}) {
        const double a = rk.value(r, t), b = back(r, t);
        CHECK(std::fabs(a - b) <= 1e-15 * std::fabs(a));
      }
  }
}

TEST_CASE("hyperbolic scaling keeps normalization") {
  const auto rk = hyperbolic3_reference(2.0);
  CHECK(reference_normalization(rk, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  const auto rk2 = hyperbolic2_reference(0.5);
  CHECK(reference_normalization(rk2, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
}
