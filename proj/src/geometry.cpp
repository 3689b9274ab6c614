#include "fkmc/geometry.hpp"

#include <cmath>

#include "fkmc/quad.hpp"

namespace fkmc {

namespace {

RadialFn zero_fn() {
  return [](double) { return 0.0; };
}

}  // namespace

RadialScalarField RadialScalarField::zero() {
  RadialScalarField v;
  v.value = zero_fn();
  v.radial_derivative = zero_fn();
  v.bound_sup = 0.0;
  v.bound_inf = 0.0;
  v.grad_bound = 0.0;
  v.is_zero = true;
  v.is_constant = true;
  v.constant_value = 0.0;
  return v;
}

RadialScalarField RadialScalarField::constant(double c) {
  RadialScalarField v;
  v.value = [c](double) { return c; };
  v.radial_derivative = zero_fn();
  v.bound_sup = c;
  v.bound_inf = c;
  v.grad_bound = 0.0;
  v.is_zero = (c == 0.0);
  v.is_constant = true;
  v.constant_value = c;
  return v;
}

RadialScalarField RadialScalarField::gaussian_bump(double amp, double width) {
  RadialScalarField v;
  const double w2 = width * width;
  v.value = [amp, w2](double r) { return amp * std::exp(-r * r / w2); };
  v.radial_derivative = [amp, w2](double r) { return -2.0 * r / w2 * amp * std::exp(-r * r / w2); };
  v.bound_sup = std::max(amp, 0.0);
  v.bound_inf = std::min(amp, 0.0);
  // |d/dr| peaks at r = width/sqrt(2)
  v.grad_bound = std::fabs(amp) * std::sqrt(2.0 / std::exp(1.0)) / width;
  v.is_zero = (amp == 0.0);
  v.is_constant = (amp == 0.0);
  return v;
}

RadialScalarField RadialScalarField::custom(RadialFn value, RadialFn derivative, double sup,
                                            double inf, double grad_bound) {
  RadialScalarField v;
  v.value = std::move(value);
  v.radial_derivative = std::move(derivative);
  v.bound_sup = sup;
  v.bound_inf = inf;
  v.grad_bound = grad_bound;
  return v;
}

RadialVectorField RadialVectorField::zero() {
  RadialVectorField z;
  z.zr = zero_fn();
  z.dzr = zero_fn();
  z.is_zero = true;
  return z;
}

RadialVectorField RadialVectorField::linear(double a) {
  RadialVectorField z;
  z.zr = [a](double r) { return a * r; };
  z.dzr = [a](double) { return a; };
  z.is_zero = (a == 0.0);
  return z;
}

RadialVectorField RadialVectorField::custom(RadialFn zr, RadialFn dzr) {
  RadialVectorField z;
  z.zr = std::move(zr);
  z.dzr = std::move(dzr);
  z.is_zero = false;
  return z;
}

ModelGeometry ModelGeometry::euclidean(int n) {
  if (n < 2) throw config_error("geometry: dimension n >= 2 required");
  ModelGeometry g;
  g.n = n;
  g.name = "euclidean";
  g.is_flat = true;
  g.f = [](double r) { return r; };
  g.f1 = [](double) { return 1.0; };
  g.f2 = zero_fn();
  g.h = zero_fn();
  g.h1 = zero_fn();
  g.h2 = zero_fn();
  g.phi_closed = zero_fn();
  g.cubic = 0.0;
  g.rho_h_lower = 0.0;
  return g;
}

ModelGeometry ModelGeometry::hyperbolic(int n, double radius) {
  if (n < 2) throw config_error("geometry: dimension n >= 2 required");
  if (!(radius > 0.0)) throw config_error("geometry: hyperbolic radius R must be positive");
  ModelGeometry g;
  g.n = n;
  g.name = "hyperbolic";
  const double R = radius;
  g.f = [R](double r) { return R * std::sinh(r / R); };
  g.f1 = [R](double r) { return std::cosh(r / R); };
  g.f2 = [R](double r) { return std::sinh(r / R) / R; };
  g.h = zero_fn();
  g.h1 = zero_fn();
  g.h2 = zero_fn();
  g.cubic = 1.0 / (6.0 * R * R);
  g.rho_h_lower = -(n - 1) / (R * R);
  const double r_eps = g.r_eps;
  // phi on constant curvature -1/R^2:
  //   -(n-1)^2/(8R^2) + (n-1)(n-3)/8 * (1/r^2 - 1/(R sinh(r/R))^2)
  g.phi_closed = [n, R, r_eps](double r) {
    const double lead = -(n - 1.0) * (n - 1.0) / (8.0 * R * R);
    if (n == 3) return lead;
    double gap;  // 1/r^2 - 1/(R sinh(r/R))^2, finite limit 1/(3R^2) at 0
    if (r < r_eps) {
      const double x = r / R;
      gap = (1.0 / 3.0 - x * x / 15.0) / (R * R);
    } else {
      const double s = R * std::sinh(r / R);
      gap = 1.0 / (r * r) - 1.0 / (s * s);
    }
    return lead + (n - 1.0) * (n - 3.0) / 8.0 * gap;
  };
  return g;
}

ModelGeometry ModelGeometry::spherical_cap(int n) {
  ModelGeometry g;
  g.n = n;
  g.name = "spherical_cap";
  g.f = [](double r) { return std::sin(r); };
  g.f1 = [](double r) { return std::cos(r); };
  g.f2 = [](double r) { return -std::sin(r); };
  g.h = zero_fn();
  g.h1 = zero_fn();
  g.h2 = zero_fn();
  g.cubic = -1.0 / 6.0;
  g.rho_h_lower = static_cast<double>(n - 1);
  g.r_max = 3.0;  // stay inside the cap, away from the antipode
  return g;
}

ModelGeometry ModelGeometry::custom(int n, RadialFn f, RadialFn f1, RadialFn f2, double cubic,
                                    double rho_lower, double r_max, std::string name) {
  if (n < 2) throw config_error("geometry: dimension n >= 2 required");
  ModelGeometry g;
  g.n = n;
  g.name = std::move(name);
  g.f = std::move(f);
  g.f1 = std::move(f1);
  g.f2 = std::move(f2);
  g.h = zero_fn();
  g.h1 = zero_fn();
  g.h2 = zero_fn();
  g.cubic = cubic;
  g.rho_h_lower = rho_lower;
  g.r_max = r_max;
  return g;
}

void ModelGeometry::set_weight(RadialFn h_, RadialFn h1_, RadialFn h2_, double rho_lower,
                               double r_scan) {
  h = std::move(h_);
  h1 = std::move(h1_);
  h2 = std::move(h2_);
  h_is_zero = false;
  if (rho_lower != kInf) {
    rho_h_lower = rho_lower;
    return;
  }
  // Numeric lower bound for Ric - 2 Hess h on the working range.
  double lo = kInf;
  const int samples = 4096;
  const double top = std::min(r_scan, r_max);
  for (int i = 1; i <= samples; ++i) {
    const double r = top * i / samples;
    const FrameDiag ric = ricci_in_adapted_frame(r);
    const FrameDiag hess = hess_h_in_adapted_frame(r);
    lo = std::min(lo, ric.radial - 2.0 * hess.radial);
    lo = std::min(lo, ric.tangential - 2.0 * hess.tangential);
  }
  rho_h_lower = lo;
}

void ModelGeometry::require_radius(double r, bool strict) const {
  if (r < 0.0 || (strict && r == 0.0))
    throw std::domain_error("geometry: radius must be " + std::string(strict ? "positive" : "non-negative"));
  if (r > r_max) throw numerical_error("geometry: radius exceeds the warp's tabulated range");
}

double ModelGeometry::log_jacobian(double r) const {
  require_radius(r, false);
  if (r < r_eps) return (n - 1) * std::log1p(cubic * r * r);
  return (n - 1) * std::log(f(r) / r);
}

double ModelGeometry::grad_log_jacobian(double r) const {
  require_radius(r, false);
  if (r < r_eps) return (n - 1) * 2.0 * cubic * r / (1.0 + cubic * r * r);
  return (n - 1) * (f1(r) / f(r) - 1.0 / r);
}

double ModelGeometry::laplacian_r(double r) const {
  require_radius(r, true);
  return (n - 1) * f1(r) / f(r);
}

double ModelGeometry::phi_generic(double r) const {
  require_radius(r, false);
  const double nm1 = n - 1.0;
  if (r < r_eps) return -0.5 * cubic * nm1 * n;
  const double inv_r = 1.0 / r;
  const double u = f1(r) / f(r);           // (log f)'
  const double up = f2(r) / f(r) - u * u;  // (log f)''
  return 0.125 * nm1 * nm1 * (inv_r * inv_r - u * u) - 0.25 * nm1 * (up + inv_r * inv_r);
}

double ModelGeometry::phi(double r) const {
  if (phi_closed) {
    require_radius(r, false);
    return phi_closed(r);
  }
  return phi_generic(r);
}

double ModelGeometry::laplacian_radial_fn(double r, double d1, double d2) const {
  if (r < r_eps) {
    // Lap g = g'' + ((n-1)/r + glj) g'; for a smooth radial g, g'(r)/r -> g''(0)
    return n * d2;
  }
  return d2 + ((n - 1) / r + grad_log_jacobian(r)) * d1;
}

double ModelGeometry::phi_h(double r) const {
  double out = phi(r);
  if (!h_is_zero) {
    const double hp = h1(r);
    out -= 0.5 * laplacian_radial_fn(r, hp, h2(r));
    out -= 0.5 * hp * hp;
  }
  return out;
}

double ModelGeometry::gauss_kernel_k(double r, double t) const {
  if (!(t > 0.0)) throw std::domain_error("gauss kernel: t must be positive");
  require_radius(r, false);
  return std::pow(2.0 * kPi * t, -0.5 * n) * std::exp(-r * r / (2.0 * t) - 0.5 * log_jacobian(r));
}

FrameDiag ModelGeometry::ricci_in_adapted_frame(double r) const {
  require_radius(r, true);
  FrameDiag d;
  if (r < r_eps) {
    const double k0 = -6.0 * cubic;  // sectional curvature at the pole
    d.radial = (n - 1) * k0;
    d.tangential = (n - 1) * k0;
    return d;
  }
  const double fr = f(r);
  const double ratio2 = f2(r) / fr;
  d.radial = -(n - 1) * ratio2;
  const double g1 = f1(r);
  d.tangential = -ratio2 + (n - 2) * (1.0 - g1 * g1) / (fr * fr);
  return d;
}

FrameDiag ModelGeometry::hess_h_in_adapted_frame(double r) const {
  require_radius(r, true);
  FrameDiag d;
  if (h_is_zero) return d;
  d.radial = h2(r);
  d.tangential = (r < r_eps) ? h2(r) : h1(r) * f1(r) / f(r);
  return d;
}

void ModelGeometry::validate() const {
  const double r = r_eps;
  const double ratio = f(r) / r;
  const double budget = 10.0 * r * r * std::fabs(f2(r)) / 2.0 + 1e-10;
  if (!(std::fabs(ratio - 1.0) < budget + std::fabs(cubic) * r * r * 2.0))
    throw config_error("geometry: warp fails f(r)/r -> 1 at the pole");
  if (!(f1(r) > 0.0) || !(f(2.0 * r) > 0.0))
    throw config_error("geometry: warp must be positive with positive slope near the pole");
}

double s_field(const ModelGeometry& g, const RadialVectorField& z, double r) {
  if (r < 0.0) throw std::domain_error("s_field: radius must be non-negative");
  if (z.is_zero || r == 0.0) return 0.0;
  (void)g;
  return -integrate_adaptive([&z](double s) { return z.zr(s); }, 0.0, r, 1e-12);
}

double psi_field(const ModelGeometry& g, const RadialVectorField& z, double r) {
  if (r < 0.0) throw std::domain_error("psi_field: radius must be non-negative");
  if (z.is_zero) return 0.0;
  const double zr = z.zr(r);
  const double dzr = z.dzr(r);
  double lap_s;  // Lap S with S' = -zr
  if (r < g.r_eps) {
    lap_s = -g.n * dzr;
  } else {
    lap_s = -dzr - ((g.n - 1) / r + g.grad_log_jacobian(r)) * zr;
  }
  double out = -0.5 * zr * zr + 0.5 * lap_s;
  if (!g.h_is_zero) out -= zr * g.h1(r);
  return out;
}

}  // namespace fkmc
