#include "conspec/simd.hpp"

namespace conspec::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void minmax_update(const double* x, double* lo, double* hi, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] < lo[i]) lo[i] = x[i];
    if (x[i] > hi[i]) hi[i] = x[i];
  }
}

}  // namespace conspec::simd::scalar
