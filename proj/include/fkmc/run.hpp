#pragma once

#include <string>

#include "fkmc/config.hpp"

namespace fkmc {

inline constexpr const char* kVersion = "0.1.0";

// Executes one estimator described by (subcommand, config) and returns the
// result document as canonical JSON. Subcommands: estimate-kernel,
// estimate-gradient, estimate-log-gradient, estimate-semigroup.
std::string run_estimate(const std::string& subcommand, const ExperimentConfig& cfg);

// audit-bounds: JSON array of BoundReports.
std::string run_audit_bounds(const ExperimentConfig& cfg);

// sample-paths: CSV dump (concatenated paths with a path_id column).
std::string run_sample_paths(const ExperimentConfig& cfg, std::size_t max_paths);

// reference: CSV table of kernel values and radial derivatives.
std::string run_reference_table(const std::string& kind, int n, double radius, double t,
                                double r_min, double r_max, int count);

}  // namespace fkmc
