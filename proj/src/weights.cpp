#include "fkmc/weights.hpp"

#include <cmath>
#include <string>

#include "fkmc/common.hpp"

namespace fkmc {

double PathFunctionals::beta_h() const { return std::exp(int_phi_h + int_psi - int_V); }

double PathFunctionals::gamma() const { return std::exp(int_phi_h + int_psi); }

PathFunctionals PathFunctionals::from(const PathOut& out) {
  PathFunctionals f;
  f.int_phi_h = out.int_phi_h;
  f.int_psi = out.int_psi;
  f.int_V = out.int_V;
  return f;
}

WeightCertificate certify_weight_exponent(const ModelGeometry& g, const RadialScalarField& V,
                                          const RadialVectorField& Z, double r0, double T) {
  WeightCertificate cert;
  // Bridge and forward excursions at the supported path counts stay well
  // inside r0 + 10 sqrt(T); add margin.
  double r_top = r0 + 10.0 * std::sqrt(T) + 2.0;
  if (g.r_max < kInf) r_top = std::min(r_top, g.r_max);
  cert.r_cert = r_top;
  const int samples = 4096;
  double sup = -kInf, inf = kInf;
  for (int i = 0; i <= samples; ++i) {
    const double r = r_top * i / samples;
    double e = g.phi_h(r);
    if (!Z.is_zero) e += psi_field(g, Z, r);
    if (!V.is_zero) e -= V.value(r);
    if (!std::isfinite(e))
      throw precondition_error("weight exponent phi_h + psi - V is not finite at r = " +
                               std::to_string(r));
    sup = std::max(sup, e);
    inf = std::min(inf, e);
  }
  cert.sup_exponent = sup;
  cert.inf_exponent = inf;
  return cert;
}

double beta_weight_prefix(const PathOut& out) {
  return std::exp(out.prefix_phi_psi - out.prefix_V);
}

double girsanov_density(const ModelGeometry& g, const RadialVectorField& Z, double T, double t,
                        double r0, const PathOut& out) {
  if (!(t < T)) throw std::domain_error("girsanov density requires t < T");
  if (!(t >= 0.0)) throw std::domain_error("girsanov density requires t >= 0");
  const double rt = out.r_marginal;
  auto boundary = [&](double r, double tau) {
    double log_term = std::log(g.gauss_kernel_k(r, tau));
    if (!Z.is_zero) log_term += s_field(g, Z, r);
    if (!g.h_is_zero) log_term -= g.h(r);
    return log_term;
  };
  const double log_m = boundary(r0, T) - boundary(rt, T - t) + out.prefix_phi_psi;
  const double m = std::exp(log_m);
  if (!std::isfinite(m)) throw numerical_error("girsanov density overflowed");
  return m;
}

}  // namespace fkmc
