#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace fkmc {

// Stack-allocated vector/matrix for the full-polar simulation (n = 2 or 3).
inline constexpr int kMaxDim = 3;

struct Vec {
  int n = 0;
  std::array<double, kMaxDim> a{};

  static Vec zeros(int n) { return Vec{n, {}}; }
  double& operator[](int i) { return a[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return a[static_cast<std::size_t>(i)]; }
};

struct Mat {
  int n = 0;
  std::array<double, kMaxDim * kMaxDim> a{};  // row-major

  static Mat identity(int n) {
    Mat m{n, {}};
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat zeros(int n) { return Mat{n, {}}; }

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * kMaxDim + j)]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * kMaxDim + j)]; }
};

inline double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (int i = 0; i < x.n; ++i) s += x[i] * y[i];
  return s;
}

inline double norm(const Vec& x) { return std::sqrt(dot(x, x)); }

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec y = Vec::zeros(m.n);
  for (int i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.n; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

// y = m^T x
inline Vec matTvec(const Mat& m, const Vec& x) {
  Vec y = Vec::zeros(m.n);
  for (int j = 0; j < m.n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m.n; ++i) s += m(i, j) * x[i];
    y[j] = s;
  }
  return y;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c = Mat::zeros(a.n);
  for (int i = 0; i < a.n; ++i)
    for (int k = 0; k < a.n; ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < a.n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Mat add_scaled(const Mat& a, const Mat& b, double s) {
  Mat c = a;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) c(i, j) += s * b(i, j);
  return c;
}

// Modified Gram-Schmidt on the columns.
inline void orthonormalize_columns(Mat& m) {
  const int n = m.n;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < j; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += m(i, k) * m(i, j);
      for (int i = 0; i < n; ++i) m(i, j) -= s * m(i, k);
    }
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) nrm += m(i, j) * m(i, j);
    nrm = std::sqrt(nrm);
    if (nrm > 0.0)
      for (int i = 0; i < n; ++i) m(i, j) /= nrm;
  }
}

// max_ij |M^T M - I|, the frame orthonormality defect
inline double gram_defect(const Mat& m) {
  double worst = 0.0;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      double s = 0.0;
      for (int k = 0; k < m.n; ++k) s += m(k, i) * m(k, j);
      const double d = std::fabs(s - (i == j ? 1.0 : 0.0));
      if (d > worst) worst = d;
    }
  return worst;
}

// Operator (spectral) norm via power iteration on M^T M.
inline double operator_norm(const Mat& m) {
  Vec v = Vec::zeros(m.n);
  v[0] = 1.0;
  for (int i = 1; i < m.n; ++i) v[i] = 0.7 / (i + 1);
  double lambda = 0.0;
  for (int it = 0; it < 60; ++it) {
    Vec w = matTvec(m, matvec(m, v));
    const double nw = norm(w);
    if (nw == 0.0) return 0.0;
    for (int i = 0; i < m.n; ++i) v[i] = w[i] / nw;
    lambda = nw;
  }
  return std::sqrt(lambda);
}

}  // namespace fkmc
