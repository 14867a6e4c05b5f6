#pragma once

// Data-parallel inner loops used across the pipeline. Each kernel has a scalar
// reference version and, where the target supports it, an AVX2+FMA (x86-64) or
// NEON (aarch64) variant. The variant is picked once at startup from the CPU
// capabilities and can be pinned with DSTS_SIMD={scalar,avx2,neon}.
//
// Variants sum in different orders, so results agree to rounding, not bitwise.
// A given process always uses one variant, which keeps every run reproducible.

#include <cstddef>
#include <span>

namespace dsts::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // acc[i] += (x[i] - mean[i])^2
  void (*accumulate_squared_deviation)(const double* x, const double* mean, double* acc,
                                       std::size_t n);
};

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);

// Throws Error(kInvalidArgument) when the requested ISA cannot run here.
const KernelTable& kernels_for(Isa isa);

// Kernel table chosen for this process.
const KernelTable& active();

namespace detail {
extern const KernelTable kScalarKernels;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Kernels;
#endif
#if defined(__aarch64__)
extern const KernelTable kNeonKernels;
#endif
}  // namespace detail

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void accumulate_squared_deviation(std::span<const double> x, std::span<const double> mean,
                                         std::span<double> acc) {
  active().accumulate_squared_deviation(x.data(), mean.data(), acc.data(), x.size());
}

}  // namespace dsts::simd
