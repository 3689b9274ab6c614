#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fkmc/geometry.hpp"
#include "fkmc/grid.hpp"
#include "fkmc/simulate.hpp"

namespace fkmc {

enum class GradVariant { bc1, holder };

struct EstimatorOptions {
  std::size_t n_paths = 10000;
  std::uint64_t seed = 12345;
  int workers = 0;  // 0: all available, 1: serial reference
  PathMode mode = PathMode::radial_only;
  TransportScheme transport = TransportScheme::midpoint;
  bool antithetic = false;
  bool check_w_bound = false;
  double t_inner = -1.0;  // gradient of the semigroup: inner horizon
};

struct GridSummary {
  double T = 0.0;
  int steps = 0;
  std::string refinement;
  double ratio = 1.0;
};

struct EstimatorResult {
  std::string name;
  std::string variant;
  double estimate = 0.0;
  double se = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  GridSummary grid;
  double ess = -1.0;  // effective sample size, self-normalised estimators only
  std::optional<double> reference;
  std::string reference_source;
  std::optional<double> z_score;
  std::vector<std::string> notes;

  void attach_reference(double value, std::string source);
};

GridSummary summarize(const TimeGrid& grid);

// p_T(x0, pole) for the generator (1/2)(Lap + 2 grad h . grad) - V with an
// optional extra radial drift Z.
EstimatorResult estimate_kernel(const ModelGeometry& g, const RadialScalarField& V,
                                const RadialVectorField& Z, double r0, double T,
                                const TimeGrid& grid, const EstimatorOptions& opts);

// Common-random-number central difference of estimate_kernel in r0.
EstimatorResult estimate_kernel_fd(const ModelGeometry& g, const RadialScalarField& V,
                                   const RadialVectorField& Z, double r0, double bump, double T,
                                   const TimeGrid& grid, const EstimatorOptions& opts);

// E[ f(x_T) exp(-int V) ] over forward paths.
EstimatorResult estimate_semigroup(const ModelGeometry& g, const RadialScalarField& V,
                                   const RadialScalarField& f, double r0, double T,
                                   const TimeGrid& grid, const EstimatorOptions& opts);

// Directional derivative of the semigroup at x0; v in the adapted frame.
EstimatorResult estimate_grad_semigroup(const ModelGeometry& g, const RadialScalarField& V,
                                        const RadialScalarField& f, double r0, const Vec& theta0,
                                        double T, const Vec& v, const TimeGrid& grid,
                                        const EstimatorOptions& opts, GradVariant variant);

// Directional derivative of the kernel at x0.
EstimatorResult estimate_grad_kernel(const ModelGeometry& g, const RadialScalarField& V,
                                     double r0, const Vec& theta0, double T, const Vec& v,
                                     const TimeGrid& grid, const EstimatorOptions& opts,
                                     GradVariant variant);

// Directional derivative of log kernel; self-normalised over the path weight.
EstimatorResult estimate_grad_log_kernel(const ModelGeometry& g, const RadialScalarField& V,
                                         double r0, const Vec& theta0, double T, const Vec& v,
                                         const TimeGrid& grid, const EstimatorOptions& opts,
                                         GradVariant variant);

// exp((h - S)(pole) - (h - S)(x0)) k_T(r0): the deterministic prefactor of
// the kernel representation.
double kernel_prefactor(const ModelGeometry& g, const RadialVectorField& Z, double r0, double T);

}  // namespace fkmc
