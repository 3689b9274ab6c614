#include <doctest.h>

#include <cmath>

#include "fkmc/parallel.hpp"
#include "fkmc/rng.hpp"
#include "fkmc/stats.hpp"
#include "fkmc/weights.hpp"

using namespace fkmc;

TEST_CASE("beta weight") {
  const auto vzero = RadialScalarField::zero();
  const auto zzero = RadialVectorField::zero();
  SUBCASE("flat space with no potential gives unit weight exactly") {
    const auto g = ModelGeometry::euclidean(2);
    const auto grid = TimeGrid::uniform(1.0, 64);
    SimRequest req;
    req.g = &g;
    req.grid = &grid;
    req.V = &vzero;
    req.Z = &zzero;
    req.mode = PathMode::radial_only;
    req.r0 = 1.0;
    PathOut out;
    for (int i = 0; i < 50; ++i) {
      RngStream rng(3, static_cast<std::uint64_t>(i));
      simulate_bridge_path(req, rng, out);
      CHECK(PathFunctionals::from(out).beta_h() == 1.0);
    }
  }
  SUBCASE("constant curvature gives a path-independent weight") {
    const auto g = ModelGeometry::hyperbolic(3, 1.0);
    const auto grid = TimeGrid::uniform(1.0, 200);
    SimRequest req;
    req.g = &g;
    req.grid = &grid;
    req.V = &vzero;
    req.Z = &zzero;
    req.mode = PathMode::radial_only;
    req.r0 = 1.0;
    PathOut out;
    RngStream rng0(4, 0);
    simulate_bridge_path(req, rng0, out);
    const double first = PathFunctionals::from(out).beta_h();
    CHECK(first == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    for (int i = 1; i < 50; ++i) {
      RngStream rng(4, static_cast<std::uint64_t>(i));
      simulate_bridge_path(req, rng, out);
      CHECK(PathFunctionals::from(out).beta_h() == first);
    }
  }
  SUBCASE("quadrature additivity over a split at a node") {
    const auto g = ModelGeometry::hyperbolic(2, 1.0);
    const auto grid = TimeGrid::uniform(1.0, 128);
    SimRequest req;
    req.g = &g;
    req.grid = &grid;
    req.V = &vzero;
    req.Z = &zzero;
    req.mode = PathMode::radial_only;
    req.r0 = 1.0;
    req.marginal_node = 37;
    PathOut out;
    RngStream rng(5, 12);
    simulate_bridge_path(req, rng, out);
    const double total = out.int_phi_h + out.int_psi;
    const double prefix = out.prefix_phi_psi;
    const double suffix = total - prefix;
    // the running accumulator makes the split exact up to one rounding
    CHECK(std::exp(prefix) * std::exp(suffix) ==
          doctest::Approx(std::exp(total)).epsilon(1e-15));
    CHECK(prefix + suffix == doctest::Approx(total).epsilon(1e-15));
  }
}

TEST_CASE("weight certification") {
  const auto g = ModelGeometry::hyperbolic(2, 1.0);
  const auto cert = certify_weight_exponent(g, RadialScalarField::zero(),
                                            RadialVectorField::zero(), 1.0, 1.0);
  // phi on the hyperbolic plane sits in (-1/6, -1/8]
  CHECK(cert.sup_exponent <= -0.124);
  CHECK(cert.inf_exponent >= -1.0 / 6.0 - 1e-12);

  const auto bad = RadialScalarField::custom(
      [](double r) { return r < 2.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN(); },
      [](double) { return 0.0; }, 0.0, 0.0, 0.0);
  CHECK_THROWS_AS(certify_weight_exponent(g, bad, RadialVectorField::zero(), 1.0, 1.0),
                  precondition_error);
}

TEST_CASE("girsanov density") {
  const auto vzero = RadialScalarField::zero();
  const auto zzero = RadialVectorField::zero();

  SUBCASE("t = 0 gives exactly one") {
    const auto g = ModelGeometry::hyperbolic(2, 1.0);
    const auto grid = TimeGrid::uniform(1.0, 32);
    SimRequest req;
    req.g = &g;
    req.grid = &grid;
    req.V = &vzero;
    req.Z = &zzero;
    req.mode = PathMode::radial_only;
    req.r0 = 1.0;
    req.marginal_node = 0;
    PathOut out;
    RngStream rng(6, 2);
    simulate_bridge_path(req, rng, out);
    CHECK(girsanov_density(g, zzero, 1.0, 0.0, 1.0, out) == 1.0);
  }

  SUBCASE("domain") {
    const auto g = ModelGeometry::euclidean(2);
    PathOut out;
    CHECK_THROWS_AS(girsanov_density(g, zzero, 1.0, 1.0, 1.0, out), std::domain_error);
  }

  SUBCASE("unit expectation across times and geometries") {
    // The density has diverging variance once t exceeds T/2 (the
    // 1/k_{T-t} boundary factor outruns the bridge tail), so the plain
    // mean test runs at t/T in {0.25, 0.5}; the late time is covered by
    // the damped transfer test below.
    for (int which : {0, 1, 2}) {
      const ModelGeometry g = which == 0   ? ModelGeometry::euclidean(2)
                              : which == 1 ? ModelGeometry::hyperbolic(2, 1.0)
                                           : ModelGeometry::hyperbolic(3, 1.0);
      const auto grid = TimeGrid::uniform(1.0, 400);
      for (int node : {100, 200}) {  // t/T in {0.25, 0.5}
        SimRequest req;
        req.g = &g;
        req.grid = &grid;
        req.V = &vzero;
        req.Z = &zzero;
        req.mode = PathMode::radial_only;
        req.r0 = 1.0;
        req.marginal_node = node;
        const int N = 20000;
        std::vector<double> m(N);
        run_paths(N, 0, [&](std::size_t i, PathOut& out) {
          RngStream rng(7, i);
          simulate_bridge_path(req, rng, out);
          m[i] = girsanov_density(g, zzero, 1.0, grid.node(node), 1.0, out);
        });
        const auto ms = mean_stderr(m);
        INFO(g.name << " node " << node);
        CHECK(std::fabs(ms.mean - 1.0) < 3.5 * ms.se);
      }
    }
  }

  SUBCASE("late-time transfer with a damped functional") {
    // E[F(x_t)] forward = E[F(bridge_t) M_t] with F decaying fast enough
    // to cancel the boundary factor; well-posed at t/T = 0.9.
    for (int which : {0, 1, 2}) {
      const ModelGeometry g = which == 0   ? ModelGeometry::euclidean(2)
                              : which == 1 ? ModelGeometry::hyperbolic(2, 1.0)
                                           : ModelGeometry::hyperbolic(3, 1.0);
      const auto grid = TimeGrid::uniform(1.0, 400);
      const int node = 360;  // t = 0.9
      auto F = [](double r) { return std::exp(-10.0 * r * r); };
      const int N = 30000;
      std::vector<double> fwd(N), brw(N);
      SimRequest fr;
      fr.g = &g;
      fr.grid = &grid;
      fr.V = &vzero;
      fr.mode = PathMode::full_polar;
      fr.r0 = 1.0;
      fr.marginal_node = node;
      SimRequest br = fr;
      br.mode = PathMode::radial_only;
      br.Z = &zzero;
      run_paths(N, 0, [&](std::size_t i, PathOut& out) {
        RngStream rng(17, i);
        simulate_forward_path(fr, rng, out);
        fwd[i] = F(out.r_marginal);
        RngStream rng2(18, i);
        simulate_bridge_path(br, rng2, out);
        brw[i] = F(out.r_marginal) * girsanov_density(g, zzero, 1.0, 0.9, 1.0, out);
      });
      const auto mf = mean_stderr(fwd);
      const auto mb = mean_stderr(brw);
      const double combined = std::sqrt(mf.se * mf.se + mb.se * mb.se);
      INFO(g.name);
      CHECK(std::fabs(mf.mean - mb.mean) < 3.5 * combined);
    }
  }

  SUBCASE("unit expectation with a weight and a drift") {
    auto g = ModelGeometry::hyperbolic(2, 1.0);
    g.set_weight([](double r) { return 0.2 * std::exp(-r * r); },
                 [](double r) { return -0.4 * r * std::exp(-r * r); },
                 [](double r) { return (0.8 * r * r - 0.4) * std::exp(-r * r); });
    const auto z = RadialVectorField::linear(0.3);
    const auto grid = TimeGrid::uniform(1.0, 400);
    SimRequest req;
    req.g = &g;
    req.grid = &grid;
    req.V = &vzero;
    req.Z = &z;
    req.mode = PathMode::radial_only;
    req.r0 = 1.0;
    req.marginal_node = 200;
    const int N = 20000;
    std::vector<double> m(N);
    run_paths(N, 0, [&](std::size_t i, PathOut& out) {
      RngStream rng(8, i);
      simulate_bridge_path(req, rng, out);
      m[i] = girsanov_density(g, z, 1.0, 0.5, 1.0, out);
    });
    const auto ms = mean_stderr(m);
    CHECK(std::fabs(ms.mean - 1.0) < 3.5 * ms.se);
  }
}

TEST_CASE("measure transfer: forward expectation equals weighted bridge expectation") {
  // E[F(x_t)] under the forward motion vs E[F(bridge_t) M_t] for radial F
  const auto g = ModelGeometry::hyperbolic(2, 1.0);
  const auto vzero = RadialScalarField::zero();
  const auto zzero = RadialVectorField::zero();
  const auto grid = TimeGrid::uniform(1.0, 400);
  const int node = 200;
  auto F = [](double r) { return std::exp(-r * r); };

  const int N = 30000;
  std::vector<double> fwd(N), brw(N);
  SimRequest fr;
  fr.g = &g;
  fr.grid = &grid;
  fr.V = &vzero;
  fr.mode = PathMode::full_polar;
  fr.r0 = 1.0;
  fr.marginal_node = node;
  SimRequest br = fr;
  br.mode = PathMode::radial_only;
  br.Z = &zzero;
  run_paths(N, 0, [&](std::size_t i, PathOut& out) {
    RngStream rng(9, i);
    simulate_forward_path(fr, rng, out);
    fwd[i] = F(out.r_marginal);
    RngStream rng2(10, i);
    simulate_bridge_path(br, rng2, out);
    brw[i] = F(out.r_marginal) * girsanov_density(g, zzero, 1.0, 0.5, 1.0, out);
  });
  const auto mf = mean_stderr(fwd);
  const auto mb = mean_stderr(brw);
  const double combined = std::sqrt(mf.se * mf.se + mb.se * mb.se);
  CHECK(std::fabs(mf.mean - mb.mean) < 3.5 * combined);
}
