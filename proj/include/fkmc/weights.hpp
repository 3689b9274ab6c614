#pragma once

#include "fkmc/geometry.hpp"
#include "fkmc/simulate.hpp"

namespace fkmc {

// Per-path exponential functionals.
struct PathFunctionals {
  double int_phi_h = 0.0;
  double int_psi = 0.0;
  double int_V = 0.0;

  // exp of int (phi_h + psi - V)
  double beta_h() const;
  // V-free weight exp of int (phi_h + psi)
  double gamma() const;

  static PathFunctionals from(const PathOut& out);
};

// Runtime certificate that the weight exponent phi_h + psi - V is bounded
// above on the radial range the paths can visit. Estimators refuse to run
// without it.
struct WeightCertificate {
  double sup_exponent = 0.0;
  double inf_exponent = 0.0;
  double r_cert = 0.0;
};

WeightCertificate certify_weight_exponent(const ModelGeometry& g, const RadialScalarField& V,
                                          const RadialVectorField& Z, double r0, double T);

// beta over [0, t] from a path with a marginal snapshot at node(t):
// exp(prefix int (phi_h + psi - V)).
double beta_weight_prefix(const PathOut& out);

// Radon-Nikodym density of the forward law with respect to the bridge law on
// [0, t], t < T, evaluated along a bridge path with a marginal snapshot at
// node(t).
double girsanov_density(const ModelGeometry& g, const RadialVectorField& Z, double T, double t,
                        double r0, const PathOut& out);

}  // namespace fkmc
