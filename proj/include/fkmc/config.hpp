#pragma once

#include <optional>
#include <string>

#include "fkmc/estimators.hpp"
#include "fkmc/geometry.hpp"

namespace fkmc {

// Declarative experiment description, parsed from a JSON document. Unknown
// keys are rejected and all semantic violations are reported together.
struct ExperimentConfig {
  ModelGeometry geometry;
  RadialScalarField V;
  RadialVectorField Z;
  RadialScalarField f;  // test function for semigroup estimators
  bool has_f = false;

  double r0 = 1.0;
  Vec theta0{};
  double T = 1.0;

  int grid_steps = 512;
  bool grid_geometric = true;
  double grid_ratio = 0.9;

  std::string estimator_target = "kernel";  // kernel | semigroup
  GradVariant variant = GradVariant::bc1;
  double t_inner = -1.0;
  Vec direction{};
  PathMode mode = PathMode::radial_only;
  bool mode_explicit = false;
  std::string process = "bridge";  // sample-paths: bridge | forward

  std::size_t n_paths = 10000;
  std::uint64_t seed = 12345;
  int workers = 0;
  TransportScheme transport = TransportScheme::midpoint;
  bool antithetic = false;
  std::string output_path;

  std::string resolved_json;  // canonical echo of the parsed document

  TimeGrid make_grid() const;
  TimeGrid make_grid(double horizon) const;
  EstimatorOptions estimator_options() const;
};

// Parses and validates; throws config_error listing every violation.
ExperimentConfig parse_config(const std::string& text);

}  // namespace fkmc
