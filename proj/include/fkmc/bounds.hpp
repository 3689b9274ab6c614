#pragma once

#include <string>
#include <vector>

#include "fkmc/estimators.hpp"
#include "fkmc/geometry.hpp"

namespace fkmc {

// C1(t,K) = (1 - exp(-K t)) / (K t)
double c1(double t, double K);
// C2(t,K) = (2/(K t)) (1 + (exp(-K t/2) - 1)/(K t/2))
double c2(double t, double K);

struct BoundReport {
  std::string name;
  double bound_value = 0.0;
  double observed_value = 0.0;
  double margin = 0.0;  // bound - observed
  bool satisfied = false;
  double tolerance = 0.0;  // combined statistical tolerance used
  std::string inputs;      // echo of the scenario
};

// |grad P_t f| at x0 against the entropy bound, f normalised so that the
// estimated P_t^{h,V} f(x0) = 1. Monte Carlo on common seeds feeds both sides.
BoundReport grad_semigroup_bound(const ModelGeometry& g, const RadialScalarField& V,
                                 const RadialScalarField& f, double r0, double t,
                                 const TimeGrid& grid, const EstimatorOptions& opts);

// |grad log P_t f| at x0 against the entropy bound.
BoundReport log_grad_bound(const ModelGeometry& g, const RadialScalarField& V,
                           const RadialScalarField& f, double r0, double t, const TimeGrid& grid,
                           const EstimatorOptions& opts);

// |grad p_T(., pole)| / k_T against the explicit pole bound, the constant
// assembled by quadrature from its proof-level integrals.
BoundReport pole_grad_bound(const ModelGeometry& g, const RadialScalarField& V, double r0,
                            double T, const TimeGrid& grid, const EstimatorOptions& opts);

// |grad log p_T(., pole)| against the normalised-weight variant of the same
// bound.
BoundReport pole_log_grad_bound(const ModelGeometry& g, const RadialScalarField& V, double r0,
                                double T, const TimeGrid& grid, const EstimatorOptions& opts);

// Entropy functional H_t(f, x0) = E[(f Vbar / Pf)(log(f Vbar / Pf))^+],
// estimated over forward paths; always >= 0.
double entropy_functional(const ModelGeometry& g, const RadialScalarField& V,
                          const RadialScalarField& f, double r0, double t, const TimeGrid& grid,
                          const EstimatorOptions& opts, double normalization);

// Runs the standard scenario set and returns all reports.
std::vector<BoundReport> audit_bounds(const EstimatorOptions& opts);

}  // namespace fkmc
