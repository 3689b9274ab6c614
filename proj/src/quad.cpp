#include "fkmc/quad.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "fkmc/common.hpp"

namespace fkmc {

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0, l1 = 0.0;
  const double v = gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &err, &l1);
  if (!std::isfinite(v))
    throw numerical_error("quadrature produced a non-finite value");
  // err is an absolute estimate; compare against the L1 mass of the integrand
  if (l1 > 0.0 && err > 1e3 * rel_tol * l1 && err > 1e-14 * l1)
    throw numerical_error("quadrature failed to converge to the requested tolerance");
  return v;
}

}  // namespace fkmc
