#include "fkmc/estimators.hpp"

#include <cmath>

#include "fkmc/common.hpp"
#include "fkmc/parallel.hpp"
#include "fkmc/rng.hpp"
#include "fkmc/stats.hpp"
#include "fkmc/weights.hpp"

namespace fkmc {

namespace {

RngStream stream_for(const EstimatorOptions& opts, std::size_t path) {
  if (!opts.antithetic) return RngStream(opts.seed, path);
  return RngStream(opts.seed, path / 2, /*negate_normals=*/(path % 2) == 1);
}

void require_paths(const EstimatorOptions& opts) {
  if (opts.n_paths < 2) throw config_error("n_paths >= 2 required");
}

void check_finite(double x, std::size_t path, const char* what) {
  if (!std::isfinite(x))
    throw numerical_error(std::string(what) + " is not finite on path " + std::to_string(path));
}

double constant_potential_factor(const RadialScalarField& V, double T) {
  return std::exp(-V.constant_value * T);
}

bool factor_out_constant(const RadialScalarField& V) {
  return V.is_constant && V.constant_value != 0.0;
}

}  // namespace

GridSummary summarize(const TimeGrid& grid) {
  GridSummary s;
  s.T = grid.horizon();
  s.steps = grid.steps();
  s.refinement = grid.refinement() == TimeGrid::Refinement::geometric ? "geometric" : "none";
  s.ratio = grid.ratio();
  return s;
}

void EstimatorResult::attach_reference(double value, std::string source) {
  reference = value;
  reference_source = std::move(source);
  if (se > 0.0) {
    z_score = (estimate - *reference) / se;
  } else {
    // zero-variance estimator: grade agreement on relative error instead
    const double scale = std::max(std::fabs(estimate), std::fabs(*reference));
    z_score = (scale == 0.0 || std::fabs(estimate - *reference) < 1e-9 * scale) ? 0.0 : kInf;
  }
}

double kernel_prefactor(const ModelGeometry& g, const RadialVectorField& Z, double r0, double T) {
  double log_pref = 0.0;
  if (!g.h_is_zero) log_pref += g.h(0.0) - g.h(r0);
  if (!Z.is_zero) log_pref += s_field(g, Z, r0);
  return std::exp(log_pref) * g.gauss_kernel_k(r0, T);
}

EstimatorResult estimate_kernel(const ModelGeometry& g, const RadialScalarField& V,
                                const RadialVectorField& Z, double r0, double T,
                                const TimeGrid& grid, const EstimatorOptions& opts) {
  require_paths(opts);
  if (factor_out_constant(V)) {
    EstimatorResult out = estimate_kernel(g, RadialScalarField::zero(), Z, r0, T, grid, opts);
    const double factor = constant_potential_factor(V, T);
    out.estimate *= factor;
    out.se *= factor;
    out.notes.push_back("constant potential factored out analytically");
    return out;
  }
  certify_weight_exponent(g, V, Z, r0, T);

  SimRequest req;
  req.g = &g;
  req.grid = &grid;
  req.V = &V;
  req.Z = &Z;
  req.mode = opts.mode;
  req.transport = opts.transport;
  req.r0 = r0;

  std::vector<double> beta(opts.n_paths);
  run_paths(opts.n_paths, opts.workers, [&](std::size_t i, PathOut& scratch) {
    RngStream rng = stream_for(opts, i);
    simulate_bridge_path(req, rng, scratch);
    const double b = PathFunctionals::from(scratch).beta_h();
    check_finite(b, i, "path weight");
    beta[i] = b;
  });

  const MeanStderr ms = mean_stderr(beta);
  const double pref = kernel_prefactor(g, Z, r0, T);
  EstimatorResult out;
  out.name = "estimate_kernel";
  out.estimate = pref * ms.mean;
  out.se = pref * ms.se;
  out.n_paths = opts.n_paths;
  out.seed = opts.seed;
  out.grid = summarize(grid);
  return out;
}

EstimatorResult estimate_kernel_fd(const ModelGeometry& g, const RadialScalarField& V,
                                   const RadialVectorField& Z, double r0, double bump, double T,
                                   const TimeGrid& grid, const EstimatorOptions& opts) {
  require_paths(opts);
  if (!(bump > 0.0) || bump >= r0) throw config_error("finite-difference bump must satisfy 0 < bump < r0");
  certify_weight_exponent(g, V, Z, r0 + bump, T);

  SimRequest req;
  req.g = &g;
  req.grid = &grid;
  req.V = &V;
  req.Z = &Z;
  req.mode = PathMode::radial_only;
  req.r0 = r0;

  const double pref_up = kernel_prefactor(g, Z, r0 + bump, T);
  const double pref_dn = kernel_prefactor(g, Z, r0 - bump, T);
  std::vector<double> diff(opts.n_paths);
  run_paths(opts.n_paths, opts.workers, [&](std::size_t i, PathOut&) {
    RngStream rng = stream_for(opts, i);
    PairOut pair;
    simulate_bridge_pair_radial(req, bump, rng, pair);
    const double up = pref_up * std::exp(pair.int_up);
    const double dn = pref_dn * std::exp(pair.int_down);
    check_finite(up + dn, i, "path weight");
    diff[i] = (up - dn) / (2.0 * bump);
  });

  const MeanStderr ms = mean_stderr(diff);
  EstimatorResult out;
  out.name = "estimate_kernel_fd";
  out.estimate = ms.mean;
  out.se = ms.se;
  out.n_paths = opts.n_paths;
  out.seed = opts.seed;
  out.grid = summarize(grid);
  return out;
}

EstimatorResult estimate_semigroup(const ModelGeometry& g, const RadialScalarField& V,
                                   const RadialScalarField& f, double r0, double T,
                                   const TimeGrid& grid, const EstimatorOptions& opts) {
  require_paths(opts);
  if (factor_out_constant(V)) {
    EstimatorResult out =
        estimate_semigroup(g, RadialScalarField::zero(), f, r0, T, grid, opts);
    const double factor = constant_potential_factor(V, T);
    out.estimate *= factor;
    out.se *= factor;
    out.notes.push_back("constant potential factored out analytically");
    return out;
  }

  SimRequest req;
  req.g = &g;
  req.grid = &grid;
  req.V = &V;
  req.mode = PathMode::full_polar;
  req.transport = opts.transport;
  req.r0 = r0;

  std::vector<double> vals(opts.n_paths);
  run_paths(opts.n_paths, opts.workers, [&](std::size_t i, PathOut& scratch) {
    RngStream rng = stream_for(opts, i);
    simulate_forward_path(req, rng, scratch);
    const double y = f.value(scratch.r_final) * std::exp(-scratch.int_V);
    check_finite(y, i, "semigroup integrand");
    vals[i] = y;
  });

  const MeanStderr ms = mean_stderr(vals);
  EstimatorResult out;
  out.name = "estimate_semigroup";
  out.estimate = ms.mean;
  out.se = ms.se;
  out.n_paths = opts.n_paths;
  out.seed = opts.seed;
  out.grid = summarize(grid);
  return out;
}

EstimatorResult estimate_grad_semigroup(const ModelGeometry& g, const RadialScalarField& V,
                                        const RadialScalarField& f, double r0, const Vec& theta0,
                                        double T, const Vec& v, const TimeGrid& grid,
                                        const EstimatorOptions& opts, GradVariant variant) {
  require_paths(opts);
  if (factor_out_constant(V)) {
    EstimatorResult out = estimate_grad_semigroup(g, RadialScalarField::zero(), f, r0, theta0, T,
                                                  v, grid, opts, variant);
    const double factor = constant_potential_factor(V, T);
    out.estimate *= factor;
    out.se *= factor;
    out.notes.push_back("constant potential factored out analytically");
    return out;
  }
  if (variant == GradVariant::bc1 && !V.is_zero && !(V.grad_bound < kInf))
    throw precondition_error("bc1 gradient variant needs a potential with bounded derivative");

  SimRequest req;
  req.g = &g;
  req.grid = &grid;
  req.V = &V;
  req.mode = PathMode::full_polar;
  req.transport = opts.transport;
  req.r0 = r0;
  req.theta0 = theta0;
  req.directions = {v};
  req.need_bc1 = variant == GradVariant::bc1;
  req.need_holder = variant == GradVariant::holder;
  req.t_inner = variant == GradVariant::bc1 ? opts.t_inner : -1.0;
  req.check_w_bound = opts.check_w_bound;

  std::vector<double> vals(opts.n_paths);
  double t_used = T;
  run_paths(opts.n_paths, opts.workers, [&](std::size_t i, PathOut& scratch) {
    RngStream rng = stream_for(opts, i);
    simulate_forward_path(req, rng, scratch);
    double a;
    if (variant == GradVariant::bc1) {
      // (1/t) f(x_T) Vbar_T (G_t - int_0^t (t-s) dV(W_s v) ds)
      a = f.value(scratch.r_final) * std::exp(-scratch.int_V) *
          (scratch.G[0] - scratch.bc1[0]) / scratch.t_inner_used;
    } else {
      // (1/T) f(x_T) G_T - f(x_T) * singular potential integral
      a = f.value(scratch.r_final) * (scratch.G_full[0] / T - scratch.holder[0]);
    }
    check_finite(a, i, "gradient integrand");
    vals[i] = a;
    if (i == 0) t_used = scratch.t_inner_used;
  });

  const MeanStderr ms = mean_stderr(vals);
  EstimatorResult out;
  out.name = "estimate_grad_semigroup";
  out.variant = variant == GradVariant::bc1 ? "bc1" : "holder";
  out.estimate = ms.mean;
  out.se = ms.se;
  out.n_paths = opts.n_paths;
  out.seed = opts.seed;
  out.grid = summarize(grid);
  if (variant == GradVariant::bc1 && opts.t_inner > 0.0)
    out.notes.push_back("t_inner snapped to grid node " + std::to_string(t_used));
  return out;
}

namespace {

struct BridgeGradSamples {
  std::vector<double> bracket;  // weight * bracket, per path
  std::vector<double> beta;     // full path weight, per path
};

BridgeGradSamples bridge_grad_samples(const ModelGeometry& g, const RadialScalarField& V,
                                      double r0, const Vec& theta0, double T, const Vec& v,
                                      const TimeGrid& grid, const EstimatorOptions& opts,
                                      GradVariant variant) {
  if (!(r0 > 0.0)) throw precondition_error("gradient estimators need r0 > 0");
  if (variant == GradVariant::bc1 && !V.is_zero && !(V.grad_bound < kInf))
    throw precondition_error("bc1 gradient variant needs a potential with bounded derivative");
  certify_weight_exponent(g, V, RadialVectorField::zero(), r0, T);

  SimRequest req;
  req.g = &g;
  req.grid = &grid;
  req.V = &V;
  req.mode = PathMode::full_polar;
  req.transport = opts.transport;
  req.r0 = r0;
  req.theta0 = theta0;
  req.directions = {v};
  req.need_bc1 = variant == GradVariant::bc1;
  req.need_holder = variant == GradVariant::holder;
  req.check_w_bound = opts.check_w_bound;

  BridgeGradSamples s;
  s.bracket.resize(opts.n_paths);
  s.beta.resize(opts.n_paths);
  run_paths(opts.n_paths, opts.workers, [&](std::size_t i, PathOut& scratch) {
    RngStream rng = stream_for(opts, i);
    simulate_bridge_path(req, rng, scratch);
    const PathFunctionals pf = PathFunctionals::from(scratch);
    const double beta = pf.beta_h();
    double a;
    if (variant == GradVariant::bc1) {
      a = beta * (scratch.G[0] - scratch.bc1[0]) / T;
    } else {
      // V-free weight on both terms; the suffix potential factor lives
      // inside the singular time integral
      a = pf.gamma() * (scratch.G[0] / T - scratch.holder[0]);
    }
    check_finite(a, i, "gradient integrand");
    check_finite(beta, i, "path weight");
    s.bracket[i] = a;
    s.beta[i] = beta;
  });
  return s;
}

}  // namespace

EstimatorResult estimate_grad_kernel(const ModelGeometry& g, const RadialScalarField& V,
                                     double r0, const Vec& theta0, double T, const Vec& v,
                                     const TimeGrid& grid, const EstimatorOptions& opts,
                                     GradVariant variant) {
  require_paths(opts);
  if (factor_out_constant(V)) {
    EstimatorResult out = estimate_grad_kernel(g, RadialScalarField::zero(), r0, theta0, T, v,
                                               grid, opts, variant);
    const double factor = constant_potential_factor(V, T);
    out.estimate *= factor;
    out.se *= factor;
    out.notes.push_back("constant potential factored out analytically");
    return out;
  }
  const BridgeGradSamples s =
      bridge_grad_samples(g, V, r0, theta0, T, v, grid, opts, variant);
  const MeanStderr ms = mean_stderr(s.bracket);
  double log_pref = 0.0;
  if (!g.h_is_zero) log_pref = g.h(0.0) - g.h(r0);
  const double pref = std::exp(log_pref) * g.gauss_kernel_k(r0, T);
  EstimatorResult out;
  out.name = "estimate_grad_kernel";
  out.variant = variant == GradVariant::bc1 ? "bc1" : "holder";
  out.estimate = pref * ms.mean;
  out.se = pref * ms.se;
  out.n_paths = opts.n_paths;
  out.seed = opts.seed;
  out.grid = summarize(grid);
  return out;
}

EstimatorResult estimate_grad_log_kernel(const ModelGeometry& g, const RadialScalarField& V,
                                         double r0, const Vec& theta0, double T, const Vec& v,
                                         const TimeGrid& grid, const EstimatorOptions& opts,
                                         GradVariant variant) {
  require_paths(opts);
  if (factor_out_constant(V)) {
    // The normalised weight is invariant under a constant potential shift,
    // so the estimate coincides with the V = 0 run path by path.
    EstimatorResult out = estimate_grad_log_kernel(g, RadialScalarField::zero(), r0, theta0, T,
                                                   v, grid, opts, variant);
    out.notes.push_back("constant potential cancels in the normalised weight");
    return out;
  }
  const BridgeGradSamples s =
      bridge_grad_samples(g, V, r0, theta0, T, v, grid, opts, variant);
  const RatioResult rr = ratio_mean_stderr(s.bracket, s.beta);
  EstimatorResult out;
  out.name = "estimate_grad_log_kernel";
  out.variant = variant == GradVariant::bc1 ? "bc1" : "holder";
  out.estimate = rr.ratio;
  out.se = rr.se;
  out.ess = rr.ess;
  out.n_paths = opts.n_paths;
  out.seed = opts.seed;
  out.grid = summarize(grid);
  if (rr.ess < 10.0) out.notes.push_back("effective sample size below 10");
  return out;
}

}  // namespace fkmc
