#pragma once
// Data-parallel inner loops used across the library.
//
// Every kernel has a scalar reference implementation and optional vector
// variants (AVX2+FMA on x86-64, NEON on aarch64). The active backend is picked
// once at startup from CPU features and can be overridden with the
// CONSPEC_SIMD environment variable ("scalar", "avx2", "neon") or set_backend().
// Vector variants reassociate sums, so results match the reference to within
// rounding, not bit-for-bit. A given backend is deterministic.

#include <cstddef>
#include <span>
#include <string_view>

#if defined(__x86_64__) || defined(_M_X64)
#define CONSPEC_SIMD_X86 1
#else
#define CONSPEC_SIMD_X86 0
#endif

#if defined(__aarch64__)
#define CONSPEC_SIMD_NEON 1
#else
#define CONSPEC_SIMD_NEON 0
#endif

namespace conspec::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // lo = min(lo, x), hi = max(hi, x)
  void (*minmax_update)(const double* x, double* lo, double* hi, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void minmax_update(const double* x, double* lo, double* hi, std::size_t n);
}  // namespace scalar

#if CONSPEC_SIMD_X86
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void minmax_update(const double* x, double* lo, double* hi, std::size_t n);
}  // namespace avx2
#endif

#if CONSPEC_SIMD_NEON
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void minmax_update(const double* x, double* lo, double* hi, std::size_t n);
}  // namespace neon
#endif

bool backend_supported(Backend b);
Backend active_backend();
// Returns false (and changes nothing) if the CPU lacks the backend.
bool set_backend(Backend b);
std::string_view backend_name(Backend b);
const KernelTable& kernels();
const KernelTable& kernels_for(Backend b);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}

inline double squared_norm(std::span<const double> a) {
  return kernels().dot(a.data(), a.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return kernels().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}

inline void minmax_update(std::span<const double> x, std::span<double> lo, std::span<double> hi) {
  kernels().minmax_update(x.data(), lo.data(), hi.data(), x.size());
}

}  // namespace conspec::simd
