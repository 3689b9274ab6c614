#include "fkmc/config.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "fkmc/common.hpp"

namespace fkmc {

namespace {

using nlohmann::json;

struct Violations {
  std::vector<std::string> items;
  void add(const std::string& s) { items.push_back(s); }
  void raise_if_any() const {
    if (items.empty()) return;
    std::ostringstream os;
    os << "config invalid (" << items.size() << " violation" << (items.size() > 1 ? "s" : "")
       << "):";
    for (const auto& s : items) os << "\n  - " << s;
    throw config_error(os.str());
  }
};

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed,
                Violations& v) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key())) v.add(where + ": unknown key '" + item.key() + "'");
}

double number_or(const json& obj, const std::string& key, double dflt, Violations& v,
                 const std::string& where) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number()) {
    v.add(where + "." + key + " must be a number");
    return dflt;
  }
  return obj[key].get<double>();
}

// Cubic Hermite tables for custom warps; derivatives are caller-supplied,
// never differenced.
struct HermiteTable {
  std::vector<double> x, y, dy;

  double eval(double r) const {
    if (r <= x.front()) return y.front() + dy.front() * (r - x.front());
    if (r >= x.back()) return y.back() + dy.back() * (r - x.back());
    const auto it = std::upper_bound(x.begin(), x.end(), r);
    const std::size_t hi = static_cast<std::size_t>(it - x.begin());
    const std::size_t lo = hi - 1;
    const double h = x[hi] - x[lo];
    const double s = (r - x[lo]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y[lo] + (s3 - 2 * s2 + s) * h * dy[lo] +
           (-2 * s3 + 3 * s2) * y[hi] + (s3 - s2) * h * dy[hi];
  }
};

std::vector<double> number_array(const json& j, const std::string& where, Violations& v) {
  std::vector<double> out;
  if (!j.is_array()) {
    v.add(where + " must be an array of numbers");
    return out;
  }
  for (const auto& e : j) {
    if (!e.is_number()) {
      v.add(where + " must contain only numbers");
      return {};
    }
    out.push_back(e.get<double>());
  }
  return out;
}

ModelGeometry parse_geometry(const json& j, Violations& v) {
  check_keys(j, "geometry", {"kind", "n", "R", "table", "rho_lower"}, v);
  const std::string kind = j.value("kind", "euclidean");
  int n = j.value("n", 3);
  if (n < 2) {
    v.add("geometry.n must be >= 2");
    n = 2;
  }
  if (kind == "euclidean") return ModelGeometry::euclidean(n);
  if (kind == "hyperbolic") {
    const double R = number_or(j, "R", 1.0, v, "geometry");
    if (!(R > 0.0)) {
      v.add("geometry.R must be positive");
      return ModelGeometry::euclidean(n);
    }
    return ModelGeometry::hyperbolic(n, R);
  }
  if (kind == "custom") {
    if (!j.contains("table")) {
      v.add("geometry.custom requires a 'table' with r, f, f1, f2 arrays");
      return ModelGeometry::euclidean(n);
    }
    const json& t = j["table"];
    check_keys(t, "geometry.table", {"r", "f", "f1", "f2"}, v);
    auto r = number_array(t.value("r", json::array()), "geometry.table.r", v);
    auto f = number_array(t.value("f", json::array()), "geometry.table.f", v);
    auto f1 = number_array(t.value("f1", json::array()), "geometry.table.f1", v);
    auto f2 = number_array(t.value("f2", json::array()), "geometry.table.f2", v);
    if (r.size() < 4 || f.size() != r.size() || f1.size() != r.size() || f2.size() != r.size()) {
      v.add("geometry.table arrays must have equal length >= 4");
      return ModelGeometry::euclidean(n);
    }
    if (!std::is_sorted(r.begin(), r.end()) || r.front() != 0.0)
      v.add("geometry.table.r must be sorted and start at 0");
    auto fe = std::make_shared<HermiteTable>(HermiteTable{r, f, f1});
    auto f1e = std::make_shared<HermiteTable>(HermiteTable{r, f1, f2});
    auto f2e = std::make_shared<HermiteTable>(HermiteTable{r, f2, std::vector<double>(r.size(), 0.0)});
    // second derivative interpolated linearly
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
      f2e->dy[i] = (f2[i + 1] - f2[i]) / (r[i + 1] - r[i]);
    f2e->dy.back() = f2e->dy[f2e->dy.size() - 2];
    const double r_probe = std::max(r[1], 1e-6);
    const double cubic = f2e->eval(r_probe) / (6.0 * r_probe);
    const double rho_lower = number_or(j, "rho_lower", kInf, v, "geometry");
    ModelGeometry g = ModelGeometry::custom(
        n, [fe](double x) { return fe->eval(x); }, [f1e](double x) { return f1e->eval(x); },
        [f2e](double x) { return f2e->eval(x); }, cubic,
        rho_lower == kInf ? 0.0 : rho_lower, r.back(), "custom-table");
    if (rho_lower == kInf) {
      double lo = kInf;
      for (int i = 1; i <= 512; ++i) {
        const double rr = r.back() * i / 512.0;
        const FrameDiag ric = g.ricci_in_adapted_frame(rr);
        lo = std::min(lo, std::min(ric.radial, ric.tangential));
      }
      g.rho_h_lower = lo;
    }
    try {
      g.validate();
    } catch (const config_error& e) {
      v.add(e.what());
    }
    return g;
  }
  v.add("geometry.kind must be euclidean | hyperbolic | custom");
  return ModelGeometry::euclidean(n);
}

RadialScalarField parse_scalar_field(const json& j, const std::string& where, Violations& v) {
  check_keys(j, where, {"kind", "c", "amp", "width", "table", "sup", "inf", "grad_bound"}, v);
  const std::string kind = j.value("kind", "zero");
  if (kind == "zero") return RadialScalarField::zero();
  if (kind == "constant") return RadialScalarField::constant(number_or(j, "c", 0.0, v, where));
  if (kind == "gaussian_bump") {
    const double amp = number_or(j, "amp", 1.0, v, where);
    const double width = number_or(j, "width", 1.0, v, where);
    if (!(width > 0.0)) v.add(where + ".width must be positive");
    return RadialScalarField::gaussian_bump(amp, width > 0.0 ? width : 1.0);
  }
  if (kind == "table") {
    if (!j.contains("table")) {
      v.add(where + ".table required for kind=table");
      return RadialScalarField::zero();
    }
    const json& t = j["table"];
    check_keys(t, where + ".table", {"r", "value", "derivative"}, v);
    auto r = number_array(t.value("r", json::array()), where + ".table.r", v);
    auto val = number_array(t.value("value", json::array()), where + ".table.value", v);
    auto der = number_array(t.value("derivative", json::array()), where + ".table.derivative", v);
    if (r.size() < 2 || val.size() != r.size() || der.size() != r.size()) {
      v.add(where + ".table arrays must have equal length >= 2");
      return RadialScalarField::zero();
    }
    auto tab = std::make_shared<HermiteTable>(HermiteTable{r, val, der});
    auto dtab = std::make_shared<HermiteTable>(
        HermiteTable{r, der, std::vector<double>(r.size(), 0.0)});
    const double sup = number_or(j, "sup", *std::max_element(val.begin(), val.end()), v, where);
    const double inf = number_or(j, "inf", *std::min_element(val.begin(), val.end()), v, where);
    double gb = 0.0;
    for (double d : der) gb = std::max(gb, std::fabs(d));
    const double grad_bound = number_or(j, "grad_bound", gb, v, where);
    return RadialScalarField::custom([tab](double x) { return tab->eval(x); },
                                     [dtab](double x) { return dtab->eval(x); }, sup, inf,
                                     grad_bound);
  }
  v.add(where + ".kind must be zero | constant | gaussian_bump | table");
  return RadialScalarField::zero();
}

RadialScalarField parse_weight(const json& j, Violations& v, ModelGeometry& g) {
  check_keys(j, "h", {"kind", "c", "a", "amp", "width"}, v);
  const std::string kind = j.value("kind", "zero");
  if (kind == "zero") return RadialScalarField::zero();
  if (kind == "constant") {
    const double c = number_or(j, "c", 0.0, v, "h");
    g.set_weight([c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                 g.rho_h_lower);
    return RadialScalarField::constant(c);
  }
  if (kind == "quadratic") {  // h = a r^2 / 2
    const double a = number_or(j, "a", 1.0, v, "h");
    g.set_weight([a](double r) { return 0.5 * a * r * r; }, [a](double r) { return a * r; },
                 [a](double) { return a; });
    return RadialScalarField::zero();
  }
  if (kind == "gaussian_bump") {
    const double amp = number_or(j, "amp", 1.0, v, "h");
    const double width = number_or(j, "width", 1.0, v, "h");
    if (!(width > 0.0)) {
      v.add("h.width must be positive");
      return RadialScalarField::zero();
    }
    const double w2 = width * width;
    g.set_weight([amp, w2](double r) { return amp * std::exp(-r * r / w2); },
                 [amp, w2](double r) { return -2.0 * r / w2 * amp * std::exp(-r * r / w2); },
                 [amp, w2](double r) {
                   const double e = std::exp(-r * r / w2);
                   return amp * e * (4.0 * r * r / (w2 * w2) - 2.0 / w2);
                 });
    return RadialScalarField::zero();
  }
  v.add("h.kind must be zero | constant | quadratic | gaussian_bump");
  return RadialScalarField::zero();
}

RadialVectorField parse_drift(const json& j, Violations& v) {
  check_keys(j, "Z", {"kind", "a", "table"}, v);
  const std::string kind = j.value("kind", "zero");
  if (kind == "zero") return RadialVectorField::zero();
  if (kind == "linear") return RadialVectorField::linear(number_or(j, "a", 0.0, v, "Z"));
  if (kind == "table") {
    if (!j.contains("table")) {
      v.add("Z.table required for kind=table");
      return RadialVectorField::zero();
    }
    const json& t = j["table"];
    check_keys(t, "Z.table", {"r", "zr", "dzr"}, v);
    auto r = number_array(t.value("r", json::array()), "Z.table.r", v);
    auto zr = number_array(t.value("zr", json::array()), "Z.table.zr", v);
    auto dzr = number_array(t.value("dzr", json::array()), "Z.table.dzr", v);
    if (r.size() < 2 || zr.size() != r.size() || dzr.size() != r.size()) {
      v.add("Z.table arrays must have equal length >= 2");
      return RadialVectorField::zero();
    }
    if (!zr.empty() && zr.front() != 0.0) v.add("Z.table.zr must vanish at r = 0");
    auto tab = std::make_shared<HermiteTable>(HermiteTable{r, zr, dzr});
    auto dtab = std::make_shared<HermiteTable>(
        HermiteTable{r, dzr, std::vector<double>(r.size(), 0.0)});
    return RadialVectorField::custom([tab](double x) { return tab->eval(x); },
                                     [dtab](double x) { return dtab->eval(x); });
  }
  v.add("Z.kind must be zero | linear | table");
  return RadialVectorField::zero();
}

}  // namespace

TimeGrid ExperimentConfig::make_grid() const { return make_grid(T); }

TimeGrid ExperimentConfig::make_grid(double horizon) const {
  return grid_geometric ? TimeGrid::geometric(horizon, grid_steps, grid_ratio)
                        : TimeGrid::uniform(horizon, grid_steps);
}

EstimatorOptions ExperimentConfig::estimator_options() const {
  EstimatorOptions o;
  o.n_paths = n_paths;
  o.seed = seed;
  o.workers = workers;
  o.mode = mode;
  o.transport = transport;
  o.antithetic = antithetic;
  o.t_inner = t_inner;
  return o;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config syntax error: ") + e.what());
  }
  Violations v;
  if (!doc.is_object()) {
    v.add("top-level document must be an object");
    v.raise_if_any();
  }
  check_keys(doc,
             "config", {"geometry", "h", "V", "Z", "endpoints", "T", "grid", "estimator",
                        "n_paths", "seed", "workers", "transport", "antithetic", "output"},
             v);

  ExperimentConfig cfg;
  cfg.geometry = parse_geometry(doc.value("geometry", json::object()), v);
  if (doc.contains("h")) parse_weight(doc["h"], v, cfg.geometry);
  cfg.V = parse_scalar_field(doc.value("V", json{{"kind", "zero"}}), "V", v);
  cfg.Z = parse_drift(doc.value("Z", json{{"kind", "zero"}}), v);

  if (doc.contains("endpoints")) {
    const json& e = doc["endpoints"];
    check_keys(e, "endpoints", {"r0", "theta0"}, v);
    cfg.r0 = number_or(e, "r0", 1.0, v, "endpoints");
    if (cfg.r0 < 0.0) v.add("endpoints.r0 must be non-negative");
    if (e.contains("theta0")) {
      auto th = number_array(e["theta0"], "endpoints.theta0", v);
      if (static_cast<int>(th.size()) == cfg.geometry.n) {
        cfg.theta0 = Vec::zeros(cfg.geometry.n);
        for (int i = 0; i < cfg.geometry.n; ++i) cfg.theta0[i] = th[static_cast<std::size_t>(i)];
        if (norm(cfg.theta0) == 0.0) v.add("endpoints.theta0 must be a non-zero vector");
      } else if (cfg.geometry.n <= kMaxDim) {
        v.add("endpoints.theta0 must have geometry.n components");
      }
    }
  }
  cfg.T = number_or(doc, "T", 1.0, v, "config");
  if (!(cfg.T > 0.0)) v.add("T must be positive");

  if (doc.contains("grid")) {
    const json& gj = doc["grid"];
    check_keys(gj, "grid", {"steps", "refinement", "ratio"}, v);
    cfg.grid_steps = static_cast<int>(number_or(gj, "steps", 512, v, "grid"));
    if (cfg.grid_steps < 2) v.add("grid.steps >= 2");
    const std::string refinement = gj.value("refinement", "");
    if (refinement == "geometric")
      cfg.grid_geometric = true;
    else if (refinement == "none")
      cfg.grid_geometric = false;
    else if (!refinement.empty())
      v.add("grid.refinement must be none | geometric");
    cfg.grid_ratio = number_or(gj, "ratio", 0.9, v, "grid");
    if (!(cfg.grid_ratio > 0.0 && cfg.grid_ratio <= 1.0)) v.add("grid.ratio must be in (0,1]");
  }

  if (doc.contains("estimator")) {
    const json& ej = doc["estimator"];
    check_keys(ej, "estimator",
               {"target", "variant", "t_inner", "direction", "mode", "f", "process"}, v);
    cfg.estimator_target = ej.value("target", "kernel");
    if (cfg.estimator_target != "kernel" && cfg.estimator_target != "semigroup")
      v.add("estimator.target must be kernel | semigroup");
    const std::string variant = ej.value("variant", "bc1");
    if (variant == "bc1")
      cfg.variant = GradVariant::bc1;
    else if (variant == "holder")
      cfg.variant = GradVariant::holder;
    else
      v.add("estimator.variant must be bc1 | holder");
    cfg.t_inner = number_or(ej, "t_inner", -1.0, v, "estimator");
    if (cfg.t_inner > 0.0 && cfg.t_inner > cfg.T) v.add("estimator.t_inner must lie in (0, T]");
    if (ej.contains("direction")) {
      const json& dj = ej["direction"];
      check_keys(dj, "estimator.direction", {"radial", "tangential"}, v);
      cfg.direction = Vec::zeros(std::min(cfg.geometry.n, kMaxDim));
      cfg.direction[0] = number_or(dj, "radial", 0.0, v, "estimator.direction");
      if (dj.contains("tangential")) {
        auto tg = number_array(dj["tangential"], "estimator.direction.tangential", v);
        if (static_cast<int>(tg.size()) != cfg.geometry.n - 1)
          v.add("estimator.direction.tangential must have n-1 components");
        else
          for (int a = 1; a < cfg.geometry.n && a <= kMaxDim - 1; ++a)
            cfg.direction[a] = tg[static_cast<std::size_t>(a - 1)];
      }
      if (norm(cfg.direction) == 0.0) v.add("estimator.direction must be non-zero");
    }
    const std::string mode = ej.value("mode", "");
    if (mode == "radial_only") {
      cfg.mode = PathMode::radial_only;
      cfg.mode_explicit = true;
    } else if (mode == "full_polar") {
      cfg.mode = PathMode::full_polar;
      cfg.mode_explicit = true;
    } else if (!mode.empty()) {
      v.add("estimator.mode must be radial_only | full_polar");
    }
    if (ej.contains("f")) {
      cfg.f = parse_scalar_field(ej["f"], "estimator.f", v);
      cfg.has_f = true;
    }
    cfg.process = ej.value("process", "bridge");
    if (cfg.process != "bridge" && cfg.process != "forward")
      v.add("estimator.process must be bridge | forward");
  }

  if (doc.contains("n_paths")) {
    if (!doc["n_paths"].is_number_unsigned())
      v.add("n_paths must be a non-negative integer");
    else
      cfg.n_paths = doc["n_paths"].get<std::size_t>();
  }
  if (cfg.n_paths < 2) v.add("n_paths >= 2 required");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned())
      v.add("seed must be an unsigned integer");
    else
      cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  cfg.workers = static_cast<int>(number_or(doc, "workers", 0, v, "config"));
  if (cfg.workers < 0) v.add("workers must be >= 0");
  const std::string transport = doc.value("transport", "midpoint");
  if (transport == "euler")
    cfg.transport = TransportScheme::euler;
  else if (transport == "midpoint")
    cfg.transport = TransportScheme::midpoint;
  else
    v.add("transport must be euler | midpoint");
  if (doc.contains("antithetic")) {
    if (!doc["antithetic"].is_boolean())
      v.add("antithetic must be a boolean");
    else
      cfg.antithetic = doc["antithetic"].get<bool>();
  }
  cfg.output_path = doc.value("output", "");

  // Full polar limitations
  if (cfg.geometry.n > kMaxDim &&
      (cfg.mode == PathMode::full_polar && cfg.mode_explicit))
    v.add("full_polar mode supports n in {2,3} only");

  v.raise_if_any();
  cfg.resolved_json = doc.dump(2);
  return cfg;
}

}  // namespace fkmc
