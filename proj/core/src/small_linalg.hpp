#pragma once

// Fixed-order dense kernels for the tiny symmetric systems evaluated once per
// quadrature tuple. Row-major storage, dimension m <= 16.

#include <cmath>

namespace silt::detail {

inline constexpr int kMaxSmall = 16;

// In-place lower Cholesky factor of a symmetric matrix. Returns false when a
// pivot is <= floor.
inline bool cholesky_inplace(double* a, int m, double floor = 0.0) noexcept {
  for (int j = 0; j < m; ++j) {
    double d = a[j * m + j];
    for (int p = 0; p < j; ++p) d -= a[j * m + p] * a[j * m + p];
    if (!(d > floor)) return false;
    const double l = std::sqrt(d);
    a[j * m + j] = l;
    for (int i = j + 1; i < m; ++i) {
      double s = a[i * m + j];
      for (int p = 0; p < j; ++p) s -= a[i * m + p] * a[j * m + p];
      a[i * m + j] = s / l;
    }
  }
  return true;
}

// Determinant of a symmetric positive definite matrix; 0 if not definite.
inline double spd_det_inplace(double* a, int m) noexcept {
  if (!cholesky_inplace(a, m)) return 0.0;
  double d = 1.0;
  for (int j = 0; j < m; ++j) d *= a[j * m + j];
  return d * d;
}

// Solves L y = b in place for the factor produced by cholesky_inplace.
inline void forward_solve(const double* l, int m, double* b) noexcept {
  for (int i = 0; i < m; ++i) {
    double s = b[i];
    for (int p = 0; p < i; ++p) s -= l[i * m + p] * b[p];
    b[i] = s / l[i * m + i];
  }
}

}  // namespace silt::detail
