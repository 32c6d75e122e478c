#include <atomic>
#include <cstdlib>
#include <string>

#include "conspec/simd.hpp"

namespace conspec::simd {

namespace {

constexpr KernelTable kScalar{&scalar::dot, &scalar::squared_distance, &scalar::axpy,
                              &scalar::minmax_update};
#if CONSPEC_SIMD_X86
constexpr KernelTable kAvx2{&avx2::dot, &avx2::squared_distance, &avx2::axpy,
                            &avx2::minmax_update};
#endif
#if CONSPEC_SIMD_NEON
constexpr KernelTable kNeon{&neon::dot, &neon::squared_distance, &neon::axpy,
                            &neon::minmax_update};
#endif

Backend detect() {
  if (const char* env = std::getenv("CONSPEC_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Backend::Scalar;
    if (want == "avx2" && backend_supported(Backend::Avx2)) return Backend::Avx2;
    if (want == "neon" && backend_supported(Backend::Neon)) return Backend::Neon;
  }
  if (backend_supported(Backend::Avx2)) return Backend::Avx2;
  if (backend_supported(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if CONSPEC_SIMD_X86
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
      return CONSPEC_SIMD_NEON != 0;
  }
  return false;
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

bool set_backend(Backend b) {
  if (!backend_supported(b)) return false;
  current().store(b, std::memory_order_relaxed);
  return true;
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& kernels_for(Backend b) {
  switch (b) {
#if CONSPEC_SIMD_X86
    case Backend::Avx2: return kAvx2;
#endif
#if CONSPEC_SIMD_NEON
    case Backend::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& kernels() { return kernels_for(active_backend()); }

}  // namespace conspec::simd
