#include "fkmc/reference.hpp"

#include <cmath>

#include "fkmc/common.hpp"
#include "fkmc/quad.hpp"

namespace fkmc {

namespace {

double sphere_area(int n, double r) {
  // |S^{n-1}| r^{n-1}
  const double omega = 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
  return omega * std::pow(r, n - 1);
}

double integration_cutoff(double t, double tail_scale) {
  return tail_scale * (5.0 + 3.0 * t + 50.0 * std::sqrt(t));
}

// --- hyperbolic n=3, unit curvature, generator (1/2) Lap ------------------

double h3_base(double r, double t) {
  const double tau = 0.5 * t;
  const double shape = (r == 0.0) ? 1.0 : r / std::sinh(r);
  return shape * std::pow(tau, -1.5) * std::exp(-tau - r * r / (4.0 * tau));
}

double h3_constant() {
  static const double c = [] {
    const double mass = integrate_adaptive(
        [](double r) {
          const double s = std::sinh(r);
          return h3_base(r, 1.0) * 4.0 * kPi * s * s;
        },
        0.0, integration_cutoff(1.0, 1.0), 1e-13);
    return 1.0 / mass;
  }();
  return c;
}

// --- hyperbolic n=2, unit curvature, generator (1/2) Lap ------------------

// int_r^inf s exp(-s^2/(4 tau)) / sqrt(cosh s - cosh r) ds with the endpoint
// singularity removed by s = r + u^2. cosh s - cosh r is evaluated in the
// product form 2 sinh((s+r)/2) sinh((s-r)/2), stable for s near r.
double h2_inner(double r, double tau) {
  const double smax = std::sqrt(r * r + 3200.0 * tau);
  if (smax <= r) return 0.0;
  const double umax = std::sqrt(smax - r);
  const auto f = [r, tau](double u) {
    const double s = r + u * u;
    const double den2 = 2.0 * std::sinh(0.5 * (s + r)) * std::sinh(0.5 * u * u);
    if (den2 <= 0.0) return 0.0;
    return 2.0 * u * s * std::exp(-s * s / (4.0 * tau)) / std::sqrt(den2);
  };
  return integrate_adaptive(f, 0.0, umax, 1e-11);
}

double h2_base(double r, double t) {
  const double tau = 0.5 * t;
  return std::pow(tau, -1.5) * std::exp(-0.25 * tau) * h2_inner(r, tau);
}

double h2_constant() {
  static const double c = [] {
    const double mass = integrate_adaptive(
        [](double r) { return h2_base(r, 1.0) * 2.0 * kPi * std::sinh(r); }, 0.0,
        integration_cutoff(1.0, 1.0), 1e-10);
    return 1.0 / mass;
  }();
  return c;
}

// 4th-order central difference in r; the kernel is even in r.
RadialKernel fd_derivative(RadialKernel value) {
  return [value = std::move(value)](double r, double t) {
    const double d = 3e-3 * std::max(1.0, r);
    auto v = [&](double x) { return value(std::fabs(x), t); };
    const double num = v(r - 2.0 * d) - 8.0 * v(r - d) + 8.0 * v(r + d) - v(r + 2.0 * d);
    return num / (12.0 * d);
  };
}

}  // namespace

ReferenceKernel euclidean_reference(int n) {
  if (n < 1) throw config_error("euclidean reference: n >= 1 required");
  ReferenceKernel rk;
  rk.tag = "euclidean-" + std::to_string(n);
  rk.n = n;
  rk.value = [n](double r, double t) {
    if (!(t > 0.0)) throw std::domain_error("reference kernel: t must be positive");
    return std::pow(2.0 * kPi * t, -0.5 * n) * std::exp(-r * r / (2.0 * t));
  };
  rk.derivative = [value = rk.value](double r, double t) { return -(r / t) * value(r, t); };
  rk.volume_element = [n](double r) { return sphere_area(n, r); };
  return rk;
}

ReferenceKernel hyperbolic3_reference(double radius) {
  if (!(radius > 0.0)) throw config_error("hyperbolic reference: radius must be positive");
  ReferenceKernel rk;
  rk.tag = "hyperbolic-3";
  rk.n = 3;
  const double R = radius;
  // Curvature -1/R^2 reduces to the unit case by r -> r/R, t -> t/R^2.
  rk.value = [R](double r, double t) {
    if (!(t > 0.0)) throw std::domain_error("reference kernel: t must be positive");
    return h3_constant() * h3_base(r / R, t / (R * R)) / (R * R * R);
  };
  rk.derivative = [R, value = rk.value](double r, double t) {
    const double v = value(r, t);
    const double ru = r / R, tu = t / (R * R);
    double logder;  // d/dr log p at unit curvature, then rescaled by 1/R
    if (ru < 1e-6) {
      logder = -ru / 3.0 - ru / tu;
    } else {
      logder = 1.0 / ru - 1.0 / std::tanh(ru) - ru / tu;
    }
    return v * logder / R;
  };
  rk.volume_element = [R](double r) {
    const double s = R * std::sinh(r / R);
    return 4.0 * kPi * s * s;
  };
  rk.tail_scale = std::max(1.0, R);
  return rk;
}

ReferenceKernel hyperbolic2_reference(double radius) {
  if (!(radius > 0.0)) throw config_error("hyperbolic reference: radius must be positive");
  ReferenceKernel rk;
  rk.tag = "hyperbolic-2";
  rk.n = 2;
  const double R = radius;
  rk.value = [R](double r, double t) {
    if (!(t > 0.0)) throw std::domain_error("reference kernel: t must be positive");
    return h2_constant() * h2_base(r / R, t / (R * R)) / (R * R);
  };
  rk.derivative = fd_derivative(rk.value);
  rk.volume_element = [R](double r) { return 2.0 * kPi * R * std::sinh(r / R); };
  rk.tail_scale = std::max(1.0, R);
  return rk;
}

double reference_normalization(const ReferenceKernel& rk, double t) {
  const double top = integration_cutoff(t, rk.tail_scale);
  return integrate_adaptive([&rk, t](double r) { return rk.value(r, t) * rk.volume_element(r); },
                            0.0, top, 1e-9);
}

RadialKernel half_laplacian_from_full(RadialKernel full_convention) {
  return [k = std::move(full_convention)](double r, double t) { return k(r, 0.5 * t); };
}

RadialKernel full_laplacian_from_half(RadialKernel half_convention) {
  return [k = std::move(half_convention)](double r, double t) { return k(r, 2.0 * t); };
}

}  // namespace fkmc
