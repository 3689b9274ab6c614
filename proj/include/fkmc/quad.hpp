#pragma once

#include <functional>

namespace fkmc {

// Adaptive Gauss-Kronrod quadrature on [a, b]. Throws numerical_error if the
// error estimate fails to meet the requested relative tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth = 15);

}  // namespace fkmc
