#pragma once

#include <vector>

#include "fkmc/geometry.hpp"
#include "fkmc/grid.hpp"
#include "fkmc/rng.hpp"
#include "fkmc/smallmat.hpp"

namespace fkmc {

enum class PathMode { radial_only, full_polar };
enum class TransportScheme { euler, midpoint };

// Full node-by-node dump used by `sample-paths` and by marginal tests.
struct PathRecord {
  int n = 0;
  PathMode mode = PathMode::radial_only;
  std::vector<double> t;
  std::vector<double> r;
  std::vector<Vec> theta;             // unit sphere point (full_polar)
  std::vector<Mat> frame;             // frame columns in adapted components
  std::vector<Mat> W;                 // damped transport, frame coordinates
  std::vector<std::vector<double>> G; // running stochastic integrals per direction
  std::vector<double> int_phi_h, int_psi, int_V;  // running time integrals
};

struct SimRequest {
  const ModelGeometry* g = nullptr;
  const TimeGrid* grid = nullptr;
  const RadialScalarField* V = nullptr;  // nullptr means V = 0
  const RadialVectorField* Z = nullptr;  // bridge only
  PathMode mode = PathMode::full_polar;
  TransportScheme transport = TransportScheme::midpoint;
  double r0 = 1.0;
  Vec theta0{};                      // unit vector, full_polar
  std::vector<Vec> directions;       // tangent directions at x0, adapted frame
  bool need_bc1 = false;             // int (horizon - s) dV(W_s(v)) ds
  bool need_holder = false;          // singular-in-time potential integral
  double t_inner = -1.0;             // forward: horizon for G/bc1; <=0 -> T
  int marginal_node = -1;            // snapshot node for marginal laws
  bool check_w_bound = false;        // track |W|_op against exp(-K t / 2)
};

// Per-path outputs; the vectors double as reusable workspace.
struct PathOut {
  double int_phi_h = 0.0, int_psi = 0.0, int_V = 0.0;  // over [0, T]
  double prefix_phi_psi = 0.0, prefix_V = 0.0;         // over [0, t_marginal]
  double r_marginal = 0.0;
  double r_final = 0.0;
  double r_peak = 0.0;
  double t_inner_used = 0.0;
  std::vector<double> G;       // per direction; bridge: [0,T], forward: [0, t_inner]
  std::vector<double> G_full;  // forward only: [0, T]
  std::vector<double> bc1;     // per direction
  std::vector<double> holder;  // per direction
  double gram_defect_max = 0.0;
  double w_bound_excess = 0.0;

  // scratch (per-node arrays reused across paths)
  std::vector<double> node_r, node_V, node_suffix_V;
  std::vector<std::vector<double>> node_G;
};

// Exact-in-law radial bridge: |n-dimensional Brownian bridge| pinned at the
// origin at time T, sampled by forward conditioning. r_out gets m+1 nodes.
void sample_bessel_bridge_radial(int n, double r0, const TimeGrid& grid, RngStream& rng,
                                 std::vector<double>& r_out);

// Bridge pinned at the pole at time T. full_polar integrates the tilted
// diffusion with frame and damped transport; radial_only uses the exact
// radial sampler (valid when every requested functional is radial).
void simulate_bridge_path(const SimRequest& req, RngStream& rng, PathOut& out,
                          PathRecord* rec = nullptr);

// Brownian motion with drift grad(h), full_polar only.
void simulate_forward_path(const SimRequest& req, RngStream& rng, PathOut& out,
                           PathRecord* rec = nullptr);

// One update of the damped-transport matrix in frame coordinates:
// dW/dt = E^T (-(1/2) Ric + Hess h) E W with the coefficients frozen at
// radius r. The integrated simulators use the same operator with a
// two-point update across each cell.
Mat damped_transport_step(const ModelGeometry& g, double r, const Mat& frame, const Mat& W,
                          double dt, TransportScheme scheme = TransportScheme::euler);

// Coupled pair of radial bridge paths from r0 +/- bump driven by the same
// noise; used for common-random-number finite differences.
struct PairOut {
  double int_up = 0.0;    // int (phi_h + psi - V) along the r0+bump path
  double int_down = 0.0;  // same along the r0-bump path
};
void simulate_bridge_pair_radial(const SimRequest& req, double bump, RngStream& rng, PairOut& out);

}  // namespace fkmc
