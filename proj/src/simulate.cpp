#include "fkmc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fkmc/common.hpp"

namespace fkmc {

namespace {

constexpr int kMaxRadialDim = 16;

double eval_V(const SimRequest& req, double r) {
  return (req.V && !req.V->is_zero) ? req.V->value(r) : 0.0;
}

double eval_psi(const SimRequest& req, double r) {
  return (req.Z && !req.Z->is_zero) ? psi_field(*req.g, *req.Z, r) : 0.0;
}

// Geodesic step on the unit sphere: rotate theta by angle |delta| towards
// delta and parallel-transport the sphere frame along the same great circle.
void sphere_step(int n, Vec& theta, std::vector<Vec>& sframe, const double* delta_comp) {
  double alpha2 = 0.0;
  for (int a = 0; a + 1 < n; ++a) alpha2 += delta_comp[a] * delta_comp[a];
  const double alpha = std::sqrt(alpha2);
  if (alpha == 0.0) return;
  Vec dir = Vec::zeros(n);
  for (int a = 0; a + 1 < n; ++a)
    for (int i = 0; i < n; ++i)
      dir[i] += (delta_comp[a] / alpha) * sframe[static_cast<std::size_t>(a)][i];
  const double c = std::cos(alpha), s = std::sin(alpha);
  Vec theta_new = Vec::zeros(n);
  for (int i = 0; i < n; ++i) theta_new[i] = c * theta[i] + s * dir[i];
  const double nrm = norm(theta_new);
  for (int i = 0; i < n; ++i) theta_new[i] /= nrm;
  if (n == 2) {
    theta = theta_new;
    sframe[0][0] = -theta[1];
    sframe[0][1] = theta[0];
    return;
  }
  for (auto& sv : sframe) {
    // in-plane part rotates with the great circle: dir -> c dir - s theta
    const double along = dot(sv, dir);
    for (int i = 0; i < n; ++i) sv[i] += along * ((c - 1.0) * dir[i] - s * theta[i]);
    const double onto = dot(sv, theta_new);
    for (int i = 0; i < n; ++i) sv[i] -= onto * theta_new[i];
  }
  double n0 = norm(sframe[0]);
  for (int i = 0; i < n; ++i) sframe[0][i] /= n0;
  const double cross = dot(sframe[1], sframe[0]);
  for (int i = 0; i < n; ++i) sframe[1][i] -= cross * sframe[0][i];
  double n1 = norm(sframe[1]);
  for (int i = 0; i < n; ++i) sframe[1][i] /= n1;
  theta = theta_new;
}

void init_sphere_frame(int n, const Vec& theta, std::vector<Vec>& sframe) {
  sframe.assign(static_cast<std::size_t>(n - 1), Vec::zeros(n));
  if (n == 2) {
    sframe[0][0] = -theta[1];
    sframe[0][1] = theta[0];
    return;
  }
  int pivot = 0;
  for (int i = 1; i < n; ++i)
    if (std::fabs(theta[i]) < std::fabs(theta[pivot])) pivot = i;
  Vec e = Vec::zeros(n);
  e[pivot] = 1.0;
  const double along = dot(e, theta);
  for (int i = 0; i < n; ++i) sframe[0][i] = e[i] - along * theta[i];
  const double n0 = norm(sframe[0]);
  for (int i = 0; i < n; ++i) sframe[0][i] /= n0;
  sframe[1][0] = theta[1] * sframe[0][2] - theta[2] * sframe[0][1];
  sframe[1][1] = theta[2] * sframe[0][0] - theta[0] * sframe[0][2];
  sframe[1][2] = theta[0] * sframe[0][1] - theta[1] * sframe[0][0];
}

// -(1/2) Ric + Hess h, diagonal in the adapted basis, conjugated into frame
// coordinates: M = E^T D E.
Mat damping_in_frame(const ModelGeometry& g, double r, const Mat& E) {
  const double rr = std::max(r, 1e-300);
  const FrameDiag ric = g.ricci_in_adapted_frame(rr);
  const FrameDiag hess = g.hess_h_in_adapted_frame(rr);
  const double d_rad = -0.5 * ric.radial + hess.radial;
  const double d_tan = -0.5 * ric.tangential + hess.tangential;
  const int n = E.n;
  Mat m = Mat::zeros(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = E(0, i) * d_rad * E(0, j);
      for (int k = 1; k < n; ++k) s += E(k, i) * d_tan * E(k, j);
      m(i, j) = s;
    }
  return m;
}

void ensure_sizes(const SimRequest& req, PathOut& out) {
  const std::size_t nd = req.directions.size();
  out.G.assign(nd, 0.0);
  out.G_full.assign(nd, 0.0);
  out.bc1.assign(nd, 0.0);
  out.holder.assign(nd, 0.0);
  out.int_phi_h = out.int_psi = out.int_V = 0.0;
  out.prefix_phi_psi = out.prefix_V = 0.0;
  out.r_marginal = out.r_final = out.r_peak = 0.0;
  out.t_inner_used = 0.0;
  out.gram_defect_max = 0.0;
  out.w_bound_excess = 0.0;
  const std::size_t m1 = static_cast<std::size_t>(req.grid->steps()) + 1;
  const bool nodes_needed = req.need_holder;
  out.node_r.assign(nodes_needed ? m1 : 0, 0.0);
  out.node_V.assign(nodes_needed ? m1 : 0, 0.0);
  out.node_suffix_V.assign(nodes_needed ? m1 : 0, 0.0);
  if (out.node_G.size() != (nodes_needed ? nd : 0)) out.node_G.resize(nodes_needed ? nd : 0);
  for (auto& v : out.node_G) v.assign(nodes_needed ? m1 : 0, 0.0);
}

// Singular-in-time integral int_0^T V(r_w) exp(-int_w^T V) G(w) / w dw.
// G(w) vanishes like sqrt(w), so the first cell is handled with the
// half-power rule; the remaining cells are trapezoidal.
void holder_post_pass(const SimRequest& req, PathOut& out) {
  const TimeGrid& grid = *req.grid;
  const int m = grid.steps();
  out.node_suffix_V[static_cast<std::size_t>(m)] = 0.0;
  for (int k = m - 1; k >= 0; --k)
    out.node_suffix_V[static_cast<std::size_t>(k)] =
        out.node_suffix_V[static_cast<std::size_t>(k) + 1] +
        0.5 *
            (out.node_V[static_cast<std::size_t>(k)] +
             out.node_V[static_cast<std::size_t>(k) + 1]) *
            grid.dt(k);
  for (std::size_t d = 0; d < req.directions.size(); ++d) {
    const auto& G = out.node_G[d];
    auto integrand = [&](int k) {
      return out.node_V[static_cast<std::size_t>(k)] *
             std::exp(-out.node_suffix_V[static_cast<std::size_t>(k)]) *
             G[static_cast<std::size_t>(k)] / grid.node(k);
    };
    double prev = integrand(1);
    double acc = 2.0 * grid.node(1) * prev;  // half-power rule on [0, t_1]
    for (int k = 1; k < m; ++k) {
      const double cur = integrand(k + 1);
      acc += 0.5 * (prev + cur) * grid.dt(k);
      prev = cur;
    }
    out.holder[d] = acc;
  }
}

struct RecordSink {
  PathRecord* rec = nullptr;
  void init(const SimRequest& req, int n, int m, std::size_t nd, double r0, const Vec& theta0) {
    if (!rec) return;
    rec->n = n;
    rec->mode = req.mode;
    rec->t = req.grid->nodes();
    rec->r.assign(static_cast<std::size_t>(m) + 1, 0.0);
    rec->theta.assign(static_cast<std::size_t>(m) + 1, Vec::zeros(n));
    rec->frame.assign(static_cast<std::size_t>(m) + 1, Mat::identity(n));
    rec->W.assign(static_cast<std::size_t>(m) + 1, Mat::identity(n));
    rec->G.assign(nd, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
    rec->int_phi_h.assign(static_cast<std::size_t>(m) + 1, 0.0);
    rec->int_psi.assign(static_cast<std::size_t>(m) + 1, 0.0);
    rec->int_V.assign(static_cast<std::size_t>(m) + 1, 0.0);
    rec->r[0] = r0;
    rec->theta[0] = theta0;
  }
  void node(int k, double r, const Vec& theta, const Mat& E, const Mat& W, const PathOut& out,
            const std::vector<double>& G_running) {
    if (!rec) return;
    const auto i = static_cast<std::size_t>(k);
    rec->r[i] = r;
    rec->theta[i] = theta;
    rec->frame[i] = E;
    rec->W[i] = W;
    for (std::size_t d = 0; d < G_running.size(); ++d) rec->G[d][i] = G_running[d];
    rec->int_phi_h[i] = out.int_phi_h;
    rec->int_psi[i] = out.int_psi;
    rec->int_V[i] = out.int_V;
  }
};

// Shared full-polar integrator. A bridge path carries the pinning drift and
// the compensated noise for its stochastic integrals; a forward path carries
// the grad(h) drift and plain noise.
void simulate_full_polar(const SimRequest& req, RngStream& rng, PathOut& out, PathRecord* rec,
                         bool bridge) {
  const ModelGeometry& g = *req.g;
  const TimeGrid& grid = *req.grid;
  const int n = g.n;
  const int m = grid.steps();
  if (n < 2 || n > kMaxDim) throw precondition_error("full_polar mode requires n in {2,3}");
  if (!(req.r0 > 0.0))
    throw precondition_error(bridge
                                 ? "full_polar bridge needs r0 > 0 (use radial_only from the pole)"
                                 : "forward simulation needs r0 > 0");
  ensure_sizes(req, out);
  const std::size_t nd = req.directions.size();

  const double T = grid.horizon();
  int k_inner = m;
  if (!bridge) {
    double ti = req.t_inner > 0.0 ? req.t_inner : T;
    k_inner = grid.nearest_node(ti);
    if (k_inner < 1) throw config_error("t_inner must lie in (0, T]");
    out.t_inner_used = grid.node(k_inner);
  } else {
    out.t_inner_used = T;
  }
  const double ti = out.t_inner_used;

  double r = req.r0;
  Vec theta = req.theta0;
  if (theta.n != n || norm(theta) == 0.0) {
    theta = Vec::zeros(n);
    theta[n - 1] = 1.0;
  } else {
    const double nt = norm(theta);
    for (int i = 0; i < n; ++i) theta[i] /= nt;
  }
  std::vector<Vec> sframe;
  init_sphere_frame(n, theta, sframe);
  Mat E = Mat::identity(n);
  Mat W = Mat::identity(n);

  const bool have_V = req.V && !req.V->is_zero;
  const bool want_nodes = req.need_holder;
  double php_prev = g.phi_h(r);
  double psi_prev = eval_psi(req, r);
  double v_prev = eval_V(req, r);
  std::vector<double> bc1_prev(nd, 0.0);
  if (req.need_bc1 && have_V) {
    // integrand at node 0: E = W = id, so (E W v)_radial = v_radial
    const double dv0 = req.V->radial_derivative(r);
    for (std::size_t d = 0; d < nd; ++d) bc1_prev[d] = ti * dv0 * req.directions[d][0];
  }
  auto bridge_compensator = [&](double rr, double remaining) {
    const double glj = g.grad_log_jacobian(rr);
    const double zr = (req.Z && !req.Z->is_zero) ? req.Z->zr(rr) : 0.0;
    const double h1_here = g.h_is_zero ? 0.0 : g.h1(rr);
    return -rr / remaining - 0.5 * glj - h1_here - zr;
  };
  std::vector<double> comp_prev(nd, 0.0);
  if (bridge && nd > 0) {
    const double c0 = bridge_compensator(r, grid.remaining(0));
    for (std::size_t d = 0; d < nd; ++d) comp_prev[d] = req.directions[d][0] * c0;
  }
  out.r_peak = r;
  if (req.marginal_node == 0) out.r_marginal = r;
  if (want_nodes) {
    out.node_r[0] = r;
    out.node_V[0] = v_prev;
  }
  RecordSink sink{rec};
  sink.init(req, n, m, nd, r, theta);

  const double K = g.rho_h_lower;
  double dB[kMaxDim];
  const std::vector<double>& G_running = bridge ? out.G : out.G_full;
  for (int k = 0; k < m; ++k) {
    const double dt = grid.dt(k);
    const double sdt = std::sqrt(dt);
    const double rem = grid.remaining(k);
    for (int i = 0; i < n; ++i) dB[i] = sdt * rng.normal();
    Vec dBv{n, {}};
    for (int i = 0; i < n; ++i) dBv[i] = dB[i];
    const Vec eta = matvec(E, dBv);  // noise in adapted components

    const double f_r = g.f(r);
    const double f1_over_f = g.f1(r) / f_r;
    const double h1r = g.h_is_zero ? 0.0 : g.h1(r);

    // Stochastic integrals. The dB part must be left-point (Ito); the
    // compensator part of dBtilde is an ordinary time integral and gets the
    // trapezoid rule, except for the final cell where r/(T-t) is singular.
    for (std::size_t d = 0; d < nd; ++d) {
      const Vec wv = matvec(W, req.directions[d]);
      double inc = 0.0;
      for (int i = 0; i < n; ++i) inc += wv[i] * dB[i];
      if (bridge) {
        out.G[d] += inc;
      } else {
        out.G_full[d] += inc;
        if (k < k_inner) out.G[d] += inc;
      }
    }

    const Mat M_left = damping_in_frame(g, r, E);

    // The polar chart degenerates at the pole (angular noise ~ 1/f blows
    // up), so steps that could swing the direction by a large angle are
    // taken in normal coordinates instead: y = r theta, noise mapped with
    // the exact tangential scale r/f, coordinate Ito drift included. The
    // neglected curvature corrections there are O(f' ' r^2) and vanish with
    // the step size; for a flat warp the step is exact.
    double r_next;
    const bool flat_step =
        g.is_flat || f_r < 4.0 * std::sqrt(static_cast<double>(n) * dt);
    if (flat_step) {
      const double scale = (r < 1e-14) ? 1.0 : r / f_r;
      const double glj = g.grad_log_jacobian(r);
      double drift_r;  // coordinate drift along theta
      const double ito = 0.5 * (n - 1) * (f1_over_f - r / (f_r * f_r));
      if (bridge) {
        drift_r = -r / rem - 0.5 * glj + ito;
      } else {
        drift_r = h1r + ito;
      }
      Vec y = Vec::zeros(n);
      for (int i = 0; i < n; ++i) {
        y[i] = (r + eta[0] + drift_r * dt) * theta[i];
        for (int a = 1; a < n; ++a) y[i] += eta[a] * scale * sframe[static_cast<std::size_t>(a - 1)][i];
      }
      r_next = norm(y);
      Vec theta_new = theta;
      if (r_next > 0.0)
        for (int i = 0; i < n; ++i) theta_new[i] = y[i] / r_next;
      // transport on Cartesian components (flat to the neglected order)
      Mat Enew = Mat::zeros(n);
      std::vector<Vec> scart(static_cast<std::size_t>(n - 1), Vec::zeros(n));
      if (n == 2) {
        scart[0][0] = -theta_new[1];
        scart[0][1] = theta_new[0];
      } else {
        for (int a = 0; a + 1 < n; ++a) {
          Vec sv = sframe[static_cast<std::size_t>(a)];
          const double onto = dot(sv, theta_new);
          for (int i = 0; i < n; ++i) sv[i] -= onto * theta_new[i];
          scart[static_cast<std::size_t>(a)] = sv;
        }
        double n0 = norm(scart[0]);
        if (n0 < 1e-8) {  // degenerate projection, rebuild from scratch
          init_sphere_frame(n, theta_new, scart);
        } else {
          for (int i = 0; i < n; ++i) scart[0][i] /= n0;
          const double cross = dot(scart[1], scart[0]);
          for (int i = 0; i < n; ++i) scart[1][i] -= cross * scart[0][i];
          const double n1 = norm(scart[1]);
          if (n1 < 1e-8) {
            init_sphere_frame(n, theta_new, scart);
          } else {
            for (int i = 0; i < n; ++i) scart[1][i] /= n1;
          }
        }
      }
      for (int j = 0; j < n; ++j) {
        Vec col = Vec::zeros(n);
        for (int i = 0; i < n; ++i)
          col[i] = E(0, j) * theta[i];
        for (int a = 1; a < n; ++a)
          for (int i = 0; i < n; ++i) col[i] += E(a, j) * sframe[static_cast<std::size_t>(a - 1)][i];
        Enew(0, j) = dot(col, theta_new);
        for (int a = 1; a < n; ++a) Enew(a, j) = dot(col, scart[static_cast<std::size_t>(a - 1)]);
      }
      orthonormalize_columns(Enew);
      E = Enew;
      theta = theta_new;
      sframe = scart;
      out.gram_defect_max = std::max(out.gram_defect_max, gram_defect(E));
    } else {
      // polar step: radial Euler plus a geodesic step on the sphere
      double mu_dt;
      if (bridge) {
        mu_dt = ((n - 1) / (2.0 * r) - r / rem) * dt;
      } else {
        mu_dt = (0.5 * (n - 1) * f1_over_f + h1r) * dt;
      }
      const double kick_cap = 6.0 * sdt + 0.5 * r;
      if (std::fabs(mu_dt) > kick_cap) mu_dt = (mu_dt > 0 ? kick_cap : -kick_cap);
      r_next = r + eta[0] + mu_dt;
      if (r_next < 0.0) r_next = -r_next;  // reflect; pole crossings are O(dt)-rare

      double delta_comp[kMaxDim - 1];
      for (int a = 0; a + 1 < n; ++a) delta_comp[a] = eta[a + 1] / f_r;
      sphere_step(n, theta, sframe, delta_comp);

      // Frame rotation from the warped-product connection: the generator is
      // rank two (radial direction against the tangential noise), so the
      // exact plane rotation is available. A first-order update plus
      // re-orthonormalization would miss the quadratic term, whose mean
      // drives the contraction of radial components; with the exact
      // rotation that drift comes out right in every dimension.
      {
        double tan_norm2 = 0.0;
        for (int a = 1; a < n; ++a) tan_norm2 += eta[a] * eta[a];
        const double tan_norm = std::sqrt(tan_norm2);
        if (tan_norm > 0.0) {
          const double phi_rot = f1_over_f * tan_norm;
          const double sp = std::sin(phi_rot), cp1 = 1.0 - std::cos(phi_rot);
          double q[kMaxDim] = {0.0};
          for (int a = 1; a < n; ++a) q[a] = eta[a] / tan_norm;
          Mat Enew = E;
          for (int j = 0; j < n; ++j) {
            const double cu = E(0, j);
            double cq = 0.0;
            for (int a = 1; a < n; ++a) cq += q[a] * E(a, j);
            Enew(0, j) += sp * cq - cp1 * cu;
            for (int a = 1; a < n; ++a) Enew(a, j) += (-sp * cu - cp1 * cq) * q[a];
          }
          orthonormalize_columns(Enew);
          E = Enew;
        }
        out.gram_defect_max = std::max(out.gram_defect_max, gram_defect(E));
      }
    }
    if (r_next > g.r_max)
      throw numerical_error("simulated path left the warp's tabulated radial range");

    if (req.transport == TransportScheme::euler) {
      W = add_scaled(W, matmul(M_left, W), dt);
    } else {
      const Mat MW = matmul(M_left, W);
      const Mat W_pred = add_scaled(W, MW, dt);
      const Mat M_right = damping_in_frame(g, r_next, E);
      W = add_scaled(add_scaled(W, MW, 0.5 * dt), matmul(M_right, W_pred), 0.5 * dt);
    }

    const bool last = (k + 1 == m);
    r = (bridge && last) ? 0.0 : r_next;  // bridge endpoint pinned at the pole

    if (bridge && nd > 0) {
      if (last) {
        for (std::size_t d = 0; d < nd; ++d) out.G[d] += comp_prev[d] * dt;
      } else {
        const double c_r = bridge_compensator(r, grid.remaining(k + 1));
        for (std::size_t d = 0; d < nd; ++d) {
          const Vec wv_ad = matvec(E, matvec(W, req.directions[d]));
          const double cur = wv_ad[0] * c_r;
          out.G[d] += 0.5 * (comp_prev[d] + cur) * dt;
          comp_prev[d] = cur;
        }
      }
    }

    // node k+1 integrand values; trapezoid over the step just taken
    const double php_cur = g.phi_h(r);
    const double psi_cur = eval_psi(req, r);
    const double v_cur = eval_V(req, r);
    if (!std::isfinite(php_cur + psi_cur + v_cur))
      throw numerical_error("non-finite path integrand at node t = " +
                            std::to_string(grid.node(k + 1)) + ", r = " + std::to_string(r));
    out.int_phi_h += 0.5 * (php_prev + php_cur) * dt;
    out.int_psi += 0.5 * (psi_prev + psi_cur) * dt;
    out.int_V += 0.5 * (v_prev + v_cur) * dt;
    php_prev = php_cur;
    psi_prev = psi_cur;
    v_prev = v_cur;
    out.r_peak = std::max(out.r_peak, r);

    if (req.need_bc1 && have_V && (bridge || k + 1 <= k_inner)) {
      const double weight = bridge ? grid.remaining(k + 1) : (ti - grid.node(k + 1));
      const double dv = req.V->radial_derivative(r);
      for (std::size_t d = 0; d < nd; ++d) {
        const Vec wv_ad = matvec(E, matvec(W, req.directions[d]));
        const double cur = weight * dv * wv_ad[0];
        out.bc1[d] += 0.5 * (bc1_prev[d] + cur) * dt;
        bc1_prev[d] = cur;
      }
    }

    if (k + 1 == req.marginal_node) {
      out.prefix_phi_psi = out.int_phi_h + out.int_psi;
      out.prefix_V = out.int_V;
      out.r_marginal = r;
    }
    if (want_nodes) {
      out.node_r[static_cast<std::size_t>(k) + 1] = r;
      out.node_V[static_cast<std::size_t>(k) + 1] = v_cur;
      for (std::size_t d = 0; d < nd; ++d)
        out.node_G[d][static_cast<std::size_t>(k) + 1] = G_running[d];
    }
    if (req.check_w_bound) {
      const double bound = std::exp(-0.5 * K * grid.node(k + 1));
      out.w_bound_excess = std::max(out.w_bound_excess, operator_norm(W) / bound - 1.0);
    }
    sink.node(k + 1, r, theta, E, W, out, G_running);
  }
  out.r_final = r;

  if (req.need_holder && have_V) holder_post_pass(req, out);
}

}  // namespace

void sample_bessel_bridge_radial(int n, double r0, const TimeGrid& grid, RngStream& rng,
                                 std::vector<double>& r_out) {
  if (n < 2 || n > kMaxRadialDim) throw config_error("bessel bridge: dimension out of range");
  if (r0 < 0.0) throw std::domain_error("bessel bridge: r0 must be non-negative");
  const int m = grid.steps();
  r_out.assign(static_cast<std::size_t>(m) + 1, 0.0);
  double z[kMaxRadialDim] = {0.0};
  z[0] = r0;
  r_out[0] = r0;
  for (int k = 0; k < m; ++k) {
    const double shrink = grid.remaining(k + 1) / grid.remaining(k);
    const double sd = std::sqrt(grid.dt(k) * shrink);
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      z[i] = z[i] * shrink + sd * rng.normal();
      s2 += z[i] * z[i];
    }
    r_out[static_cast<std::size_t>(k) + 1] = std::sqrt(s2);
  }
  r_out[static_cast<std::size_t>(m)] = 0.0;  // pinned
}

void simulate_bridge_path(const SimRequest& req, RngStream& rng, PathOut& out, PathRecord* rec) {
  const ModelGeometry& g = *req.g;
  const TimeGrid& grid = *req.grid;
  const int m = grid.steps();

  if (req.mode == PathMode::full_polar) {
    simulate_full_polar(req, rng, out, rec, /*bridge=*/true);
    return;
  }

  if (!req.directions.empty() || req.need_bc1 || req.need_holder)
    throw precondition_error("radial_only bridge cannot carry frame-dependent accumulators");
  ensure_sizes(req, out);
  static thread_local std::vector<double> radial;
  sample_bessel_bridge_radial(g.n, req.r0, grid, rng, radial);
  if (rec) {
    rec->n = g.n;
    rec->mode = req.mode;
    rec->t = grid.nodes();
    rec->r = radial;
    rec->theta.clear();
    rec->frame.clear();
    rec->W.clear();
    rec->G.clear();
    rec->int_phi_h.assign(radial.size(), 0.0);
    rec->int_psi.assign(radial.size(), 0.0);
    rec->int_V.assign(radial.size(), 0.0);
  }
  double php_prev = g.phi_h(radial[0]);
  double psi_prev = eval_psi(req, radial[0]);
  double v_prev = eval_V(req, radial[0]);
  out.r_peak = radial[0];
  if (req.marginal_node == 0) out.r_marginal = radial[0];
  for (int k = 0; k < m; ++k) {
    const double r_next = radial[static_cast<std::size_t>(k) + 1];
    if (r_next > g.r_max)
      throw numerical_error("simulated path left the warp's tabulated radial range");
    const double php_cur = g.phi_h(r_next);
    const double psi_cur = eval_psi(req, r_next);
    const double v_cur = eval_V(req, r_next);
    if (!std::isfinite(php_cur + psi_cur + v_cur))
      throw numerical_error("non-finite path integrand at node t = " +
                            std::to_string(grid.node(k + 1)) + ", r = " + std::to_string(r_next));
    const double dt = grid.dt(k);
    out.int_phi_h += 0.5 * (php_prev + php_cur) * dt;
    out.int_psi += 0.5 * (psi_prev + psi_cur) * dt;
    out.int_V += 0.5 * (v_prev + v_cur) * dt;
    if (k + 1 == req.marginal_node) {
      out.prefix_phi_psi = out.int_phi_h + out.int_psi;
      out.prefix_V = out.int_V;
      out.r_marginal = r_next;
    }
    out.r_peak = std::max(out.r_peak, r_next);
    if (rec) {
      rec->int_phi_h[static_cast<std::size_t>(k) + 1] = out.int_phi_h;
      rec->int_psi[static_cast<std::size_t>(k) + 1] = out.int_psi;
      rec->int_V[static_cast<std::size_t>(k) + 1] = out.int_V;
    }
    php_prev = php_cur;
    psi_prev = psi_cur;
    v_prev = v_cur;
  }
  out.r_final = 0.0;
}

Mat damped_transport_step(const ModelGeometry& g, double r, const Mat& frame, const Mat& W,
                          double dt, TransportScheme scheme) {
  const Mat M = damping_in_frame(g, r, frame);
  if (scheme == TransportScheme::euler) return add_scaled(W, matmul(M, W), dt);
  const Mat MW = matmul(M, W);
  const Mat W_half = add_scaled(W, MW, 0.5 * dt);
  return add_scaled(W, matmul(M, W_half), dt);
}

void simulate_forward_path(const SimRequest& req, RngStream& rng, PathOut& out, PathRecord* rec) {
  if (req.mode != PathMode::full_polar)
    throw precondition_error("forward simulation runs in full_polar mode");
  simulate_full_polar(req, rng, out, rec, /*bridge=*/false);
}

void simulate_bridge_pair_radial(const SimRequest& req, double bump, RngStream& rng,
                                 PairOut& out) {
  const ModelGeometry& g = *req.g;
  const TimeGrid& grid = *req.grid;
  const int n = g.n;
  if (n < 2 || n > kMaxRadialDim) throw config_error("bessel bridge: dimension out of range");
  const int m = grid.steps();
  const double r_up0 = req.r0 + bump;
  const double r_dn0 = req.r0 - bump;
  if (r_dn0 < 0.0) throw precondition_error("finite-difference bump exceeds r0");
  double zu[kMaxRadialDim] = {0.0}, zd[kMaxRadialDim] = {0.0};
  zu[0] = r_up0;
  zd[0] = r_dn0;
  auto integrand = [&](double r) { return g.phi_h(r) + eval_psi(req, r) - eval_V(req, r); };
  double up_prev = integrand(r_up0), dn_prev = integrand(r_dn0);
  out.int_up = out.int_down = 0.0;
  for (int k = 0; k < m; ++k) {
    const double shrink = grid.remaining(k + 1) / grid.remaining(k);
    const double sd = std::sqrt(grid.dt(k) * shrink);
    double su = 0.0, sdn = 0.0;
    for (int i = 0; i < n; ++i) {
      const double xi = rng.normal();
      zu[i] = zu[i] * shrink + sd * xi;
      zd[i] = zd[i] * shrink + sd * xi;
      su += zu[i] * zu[i];
      sdn += zd[i] * zd[i];
    }
    const bool last = (k + 1 == m);
    const double ru = last ? 0.0 : std::sqrt(su);
    const double rd = last ? 0.0 : std::sqrt(sdn);
    const double up_cur = integrand(ru), dn_cur = integrand(rd);
    out.int_up += 0.5 * (up_prev + up_cur) * grid.dt(k);
    out.int_down += 0.5 * (dn_prev + dn_cur) * grid.dt(k);
    up_prev = up_cur;
    dn_prev = dn_cur;
  }
}

}  // namespace fkmc
