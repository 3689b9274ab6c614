#pragma once

#include <functional>
#include <string>

namespace fkmc {

using RadialKernel = std::function<double(double, double)>;  // (r, t)

// Ground-truth kernel for the generator (1/2) Lap, evaluated closed-form
// (Euclidean, hyperbolic n=3) or by quadrature (hyperbolic n=2). Heat kernels
// quoted for the generator Lap are rescaled via t -> t/2; multiplicative
// constants are fixed by the normalization oracle, never transcribed.
struct ReferenceKernel {
  std::string tag;
  int n = 0;
  RadialKernel value;
  RadialKernel derivative;                      // d/dr at fixed t
  std::function<double(double)> volume_element;  // sphere-of-radius-r measure
  double tail_scale = 1.0;                       // integration range heuristic
};

ReferenceKernel euclidean_reference(int n);
ReferenceKernel hyperbolic3_reference(double radius = 1.0);
ReferenceKernel hyperbolic2_reference(double radius = 1.0);

// int_0^inf p_t(r) vol(r) dr; equals 1 for a normalized kernel.
double reference_normalization(const ReferenceKernel& rk, double t);

// Generator-convention conversion: a kernel quoted for generator Lap equals
// the (1/2) Lap kernel run for half the time, and vice versa. Exact.
RadialKernel half_laplacian_from_full(RadialKernel full_convention);
RadialKernel full_laplacian_from_half(RadialKernel half_convention);

}  // namespace fkmc
