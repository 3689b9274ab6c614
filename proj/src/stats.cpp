#include "fkmc/stats.hpp"

#include <algorithm>
#include <cmath>

namespace fkmc {

namespace {

double pairwise_sum_rec(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_rec(x, half) + pairwise_sum_rec(x + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> x) { return pairwise_sum_rec(x.data(), x.size()); }

MeanStderr mean_stderr(std::span<const double> x) {
  MeanStderr out;
  const std::size_t n = x.size();
  if (n == 0) return out;
  // Degenerate samples (zero-variance estimators) get the exact answer.
  bool all_equal = true;
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] != x[0]) {
      all_equal = false;
      break;
    }
  if (all_equal) {
    out.mean = x[0];
    out.se = 0.0;
    return out;
  }
  out.mean = pairwise_sum(x) / static_cast<double>(n);
  if (n < 2) return out;
  std::vector<double> dev2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - out.mean;
    dev2[i] = d * d;
  }
  const double ss = pairwise_sum(dev2);
  out.se = std::sqrt(ss / (static_cast<double>(n) * static_cast<double>(n - 1)));
  return out;
}

RatioResult ratio_mean_stderr(std::span<const double> a, std::span<const double> b) {
  RatioResult out;
  const std::size_t n = a.size();
  if (n == 0) return out;
  const double am = pairwise_sum(a) / static_cast<double>(n);
  const double bm = pairwise_sum(b) / static_cast<double>(n);
  out.ratio = am / bm;
  std::vector<double> resid2(n), b2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - out.ratio * b[i];
    resid2[i] = d * d;
    b2[i] = b[i] * b[i];
  }
  const double ss = pairwise_sum(resid2);
  out.se = std::sqrt(ss / (static_cast<double>(n) * static_cast<double>(n - 1))) / std::fabs(bm);
  const double sb = pairwise_sum(b) ;
  const double sb2 = pairwise_sum(b2);
  out.ess = sb2 > 0.0 ? sb * sb / sb2 : 0.0;
  return out;
}

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t na = a.size(), nb = b.size();
  double d = 0.0, fa = 0.0, fb = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < na && ib < nb) {
    const double xa = a[ia], xb = b[ib];
    if (xa <= xb) fa = static_cast<double>(++ia) / static_cast<double>(na);
    if (xb <= xa) fb = static_cast<double>(++ib) / static_cast<double>(nb);
    d = std::max(d, std::fabs(fa - fb));
  }
  const double ne = std::sqrt(static_cast<double>(na) * static_cast<double>(nb) /
                              static_cast<double>(na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  // Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
  double p = 0.0, sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    p += sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  p *= 2.0;
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace fkmc
