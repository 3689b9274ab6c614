#include "fkmc/run.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "fkmc/bounds.hpp"
#include "fkmc/common.hpp"
#include "fkmc/reference.hpp"
#include "fkmc/rng.hpp"
#include "fkmc/weights.hpp"

namespace fkmc {

namespace {

using nlohmann::json;

json result_to_json(const EstimatorResult& r) {
  json j;
  j["name"] = r.name;
  if (!r.variant.empty()) j["variant"] = r.variant;
  j["estimate"] = r.estimate;
  j["stderr"] = r.se;
  j["n_paths"] = r.n_paths;
  j["seed"] = r.seed;
  j["grid"] = {{"T", r.grid.T},
               {"steps", r.grid.steps},
               {"refinement", r.grid.refinement},
               {"ratio", r.grid.ratio}};
  if (r.ess >= 0.0) j["ess"] = r.ess;
  if (r.reference) {
    j["reference"] = *r.reference;
    j["reference_source"] = r.reference_source;
    if (r.z_score) j["z_score"] = std::isfinite(*r.z_score) ? json(*r.z_score) : json("inf");
  }
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

struct ReferenceValue {
  double value;
  std::string source;
};

// Closed-form / quadrature reference when the scenario admits one: h and Z
// vanish, V zero or constant, geometry Euclidean or hyperbolic (n = 2, 3).
std::optional<ReferenceValue> reference_for(const std::string& what, const ExperimentConfig& cfg) {
  if (!cfg.geometry.h_is_zero || !cfg.Z.is_zero) return std::nullopt;
  if (!cfg.V.is_constant) return std::nullopt;
  const double vshift = std::exp(-cfg.V.constant_value * cfg.T);
  std::optional<ReferenceKernel> rk;
  if (cfg.geometry.name == "euclidean") rk = euclidean_reference(cfg.geometry.n);
  if (cfg.geometry.name == "hyperbolic") {
    // radius back from cubic = 1/(6 R^2)
    const double R = 1.0 / std::sqrt(6.0 * cfg.geometry.cubic);
    if (cfg.geometry.n == 3) rk = hyperbolic3_reference(R);
    if (cfg.geometry.n == 2) rk = hyperbolic2_reference(R);
  }
  if (!rk) return std::nullopt;
  const double vr = cfg.direction.n > 0 ? cfg.direction[0] : 1.0;
  if (what == "estimate-kernel")
    return ReferenceValue{vshift * rk->value(cfg.r0, cfg.T), rk->tag};
  if (what == "estimate-gradient")
    return ReferenceValue{vshift * rk->derivative(cfg.r0, cfg.T) * vr, rk->tag + " d/dr"};
  if (what == "estimate-log-gradient")
    return ReferenceValue{rk->derivative(cfg.r0, cfg.T) / rk->value(cfg.r0, cfg.T) * vr,
                          rk->tag + " d/dr log"};
  if (what == "estimate-semigroup" && cfg.has_f) {
    if (cfg.f.is_constant)
      return ReferenceValue{cfg.f.constant_value * vshift, "constant test function"};
  }
  return std::nullopt;
}

json bound_report_to_json(const BoundReport& b) {
  return json{{"name", b.name},
              {"bound_value", b.bound_value},
              {"observed_value", b.observed_value},
              {"margin", b.margin},
              {"satisfied", b.satisfied},
              {"tolerance", b.tolerance},
              {"inputs", b.inputs}};
}

}  // namespace

std::string run_estimate(const std::string& subcommand, const ExperimentConfig& cfg) {
  const TimeGrid grid = cfg.make_grid();
  EstimatorOptions opts = cfg.estimator_options();
  EstimatorResult res;

  Vec v = cfg.direction;
  if (v.n == 0) {
    v = Vec::zeros(std::min(cfg.geometry.n, kMaxDim));
    v[0] = 1.0;  // radial by default
  }

  if (subcommand == "estimate-kernel") {
    if (!cfg.mode_explicit) opts.mode = PathMode::radial_only;
    res = estimate_kernel(cfg.geometry, cfg.V, cfg.Z, cfg.r0, cfg.T, grid, opts);
  } else if (subcommand == "estimate-semigroup") {
    if (!cfg.has_f)
      throw config_error("estimate-semigroup requires estimator.f (the test function)");
    res = estimate_semigroup(cfg.geometry, cfg.V, cfg.f, cfg.r0, cfg.T, grid, opts);
  } else if (subcommand == "estimate-gradient") {
    opts.mode = PathMode::full_polar;
    if (cfg.estimator_target == "semigroup") {
      if (!cfg.has_f)
        throw config_error("gradient of the semigroup requires estimator.f");
      res = estimate_grad_semigroup(cfg.geometry, cfg.V, cfg.f, cfg.r0, cfg.theta0, cfg.T, v,
                                    grid, opts, cfg.variant);
    } else {
      res = estimate_grad_kernel(cfg.geometry, cfg.V, cfg.r0, cfg.theta0, cfg.T, v, grid, opts,
                                 cfg.variant);
    }
  } else if (subcommand == "estimate-log-gradient") {
    opts.mode = PathMode::full_polar;
    res = estimate_grad_log_kernel(cfg.geometry, cfg.V, cfg.r0, cfg.theta0, cfg.T, v, grid, opts,
                                   cfg.variant);
  } else {
    throw config_error("unknown subcommand: " + subcommand);
  }

  if (cfg.estimator_target == "kernel" || subcommand == "estimate-semigroup")
    if (auto ref = reference_for(subcommand, cfg)) res.attach_reference(ref->value, ref->source);

  json doc;
  doc["result"] = result_to_json(res);
  doc["config"] = json::parse(cfg.resolved_json);
  doc["version"] = kVersion;
  return doc.dump(2) + "\n";
}

std::string run_audit_bounds(const ExperimentConfig& cfg) {
  EstimatorOptions opts = cfg.estimator_options();
  opts.mode = PathMode::full_polar;
  const auto reports = audit_bounds(opts);
  json arr = json::array();
  for (const auto& b : reports) arr.push_back(bound_report_to_json(b));
  json doc;
  doc["reports"] = arr;
  doc["version"] = kVersion;
  return doc.dump(2) + "\n";
}

std::string run_sample_paths(const ExperimentConfig& cfg, std::size_t max_paths) {
  const TimeGrid grid = cfg.make_grid();
  SimRequest req;
  req.g = &cfg.geometry;
  req.grid = &grid;
  req.V = &cfg.V;
  req.Z = &cfg.Z;
  req.mode = cfg.mode;
  req.transport = cfg.transport;
  req.r0 = cfg.r0;
  req.theta0 = cfg.theta0;
  if (req.mode == PathMode::full_polar && cfg.direction.n > 0) req.directions = {cfg.direction};

  const int n = cfg.geometry.n;
  std::ostringstream os;
  os << "path_id,t,r";
  if (req.mode == PathMode::full_polar) {
    for (int i = 0; i < n; ++i) os << ",theta_" << i;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) os << ",W_" << i << j;
    for (std::size_t d = 0; d < req.directions.size(); ++d) os << ",G_" << d;
  }
  os << ",int_phi_h,int_psi,int_V\n";
  os.precision(17);
  const std::size_t count = std::min<std::size_t>(max_paths, cfg.n_paths);
  PathOut out;
  PathRecord rec;
  for (std::size_t p = 0; p < count; ++p) {
    RngStream rng(cfg.seed, p);
    if (cfg.process == "forward")
      simulate_forward_path(req, rng, out, &rec);
    else
      simulate_bridge_path(req, rng, out, &rec);
    for (std::size_t k = 0; k < rec.t.size(); ++k) {
      os << p << ',' << rec.t[k] << ',' << rec.r[k];
      if (req.mode == PathMode::full_polar) {
        for (int i = 0; i < n; ++i) os << ',' << rec.theta[k][i];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) os << ',' << rec.W[k](i, j);
        for (std::size_t d = 0; d < req.directions.size(); ++d) os << ',' << rec.G[d][k];
      }
      os << ',' << rec.int_phi_h[k] << ',' << rec.int_psi[k] << ',' << rec.int_V[k] << '\n';
    }
  }
  return os.str();
}

std::string run_reference_table(const std::string& kind, int n, double radius, double t,
                                double r_min, double r_max, int count) {
  ReferenceKernel rk;
  if (kind == "euclidean")
    rk = euclidean_reference(n);
  else if (kind == "hyperbolic" && n == 3)
    rk = hyperbolic3_reference(radius);
  else if (kind == "hyperbolic" && n == 2)
    rk = hyperbolic2_reference(radius);
  else
    throw config_error("reference kernels: euclidean (any n) or hyperbolic with n in {2,3}");
  if (count < 1) throw config_error("reference: count >= 1");
  std::ostringstream os;
  os << "r,t,value,d_dr\n";
  os.precision(17);
  for (int i = 0; i < count; ++i) {
    const double r = count == 1 ? r_min : r_min + (r_max - r_min) * i / (count - 1);
    os << r << ',' << t << ',' << rk.value(r, t) << ',' << rk.derivative(r, t) << '\n';
  }
  return os.str();
}

}  // namespace fkmc
