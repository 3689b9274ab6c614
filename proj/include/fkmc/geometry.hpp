#pragma once

#include <functional>
#include <string>

#include "fkmc/common.hpp"

namespace fkmc {

using RadialFn = std::function<double(double)>;

// Bounded radial scalar field (potentials V, test functions f).
struct RadialScalarField {
  RadialFn value;
  RadialFn radial_derivative;
  double bound_sup = kInf;
  double bound_inf = -kInf;
  double grad_bound = kInf;  // sup |dV|
  bool is_zero = false;
  bool is_constant = false;
  double constant_value = 0.0;

  static RadialScalarField zero();
  static RadialScalarField constant(double c);
  // amp * exp(-(r/width)^2)
  static RadialScalarField gaussian_bump(double amp, double width = 1.0);
  static RadialScalarField custom(RadialFn value, RadialFn derivative, double sup, double inf,
                                  double grad_bound);
};

// Radial vector field Z = zr(r) * d/dr with user-supplied derivative.
struct RadialVectorField {
  RadialFn zr;
  RadialFn dzr;
  bool is_zero = true;

  static RadialVectorField zero();
  static RadialVectorField linear(double a);  // Z^r = a r
  static RadialVectorField custom(RadialFn zr, RadialFn dzr);
};

// Diagonal of a symmetric operator in the frame adapted to the radial
// direction: one radial entry, n-1 equal tangential entries.
struct FrameDiag {
  double radial = 0.0;
  double tangential = 0.0;
};

// Rotationally symmetric manifold with a pole, metric dr^2 + f(r)^2 dtheta^2,
// with an optional radial weight h. All curvature data is closed-form in f
// and its user-supplied derivatives.
class ModelGeometry {
 public:
  int n = 3;
  double rho_h_lower = 0.0;  // lower bound for Ric - 2 Hess h
  double r_eps = 1e-4;       // series threshold near the pole
  double cubic = 0.0;        // c3 in f(r) = r + c3 r^3 + O(r^5)
  double r_max = kInf;       // validity range for tabulated warps
  bool is_flat = false;      // warp f(r) = r exactly
  std::string name = "custom";

  RadialFn f, f1, f2;
  RadialFn h, h1, h2;
  RadialFn phi_closed;  // optional closed form for phi
  bool h_is_zero = true;

  static ModelGeometry euclidean(int n);
  static ModelGeometry hyperbolic(int n, double radius);
  // Constant positive curvature warp f = sin(r), valid on r < pi.
  static ModelGeometry spherical_cap(int n);
  static ModelGeometry custom(int n, RadialFn f, RadialFn f1, RadialFn f2, double cubic,
                              double rho_lower, double r_max = kInf,
                              std::string name = "custom");

  // Install a radial weight h; rho_h_lower is re-estimated numerically on
  // [0, r_scan] unless an explicit bound is supplied.
  void set_weight(RadialFn h, RadialFn h1, RadialFn h2, double rho_lower = kInf,
                  double r_scan = 20.0);

  // log J(r) = (n-1) log(f(r)/r); 0 at the pole.
  double log_jacobian(double r) const;
  // Radial derivative of log J.
  double grad_log_jacobian(double r) const;
  // Laplacian of the distance function, (n-1) f'(r)/f(r).
  double laplacian_r(double r) const;
  // Curvature correction phi = (1/8)|grad log J|^2 - (1/4) Lap(log J),
  // finite at the pole.
  double phi(double r) const;
  // Same quantity assembled from f directly, bypassing any closed form.
  double phi_generic(double r) const;
  // phi - (1/2) Lap h - (1/2)|grad h|^2
  double phi_h(double r) const;
  // (2 pi t)^{-n/2} exp(-r^2/(2t)) J^{-1/2}(r)
  double gauss_kernel_k(double r, double t) const;

  FrameDiag ricci_in_adapted_frame(double r) const;
  FrameDiag hess_h_in_adapted_frame(double r) const;

  // Laplacian of a radial function with supplied first/second derivatives.
  double laplacian_radial_fn(double r, double d1, double d2) const;

  // Checks f(r)/r -> 1 near the pole; throws config_error on failure.
  void validate() const;

 private:
  void require_radius(double r, bool strict) const;
};

// Path average of the radial part of Z along the geodesic to the pole:
// S(r) = -int_0^r zr(s) ds (adaptive quadrature).
double s_field(const ModelGeometry& g, const RadialVectorField& z, double r);

// Girsanov drift correction for the Z-tilted bridge:
// Psi = -(1/2) zr^2 - (1/2) zr' - (1/2) (Lap r) zr - zr h'
double psi_field(const ModelGeometry& g, const RadialVectorField& z, double r);

}  // namespace fkmc
