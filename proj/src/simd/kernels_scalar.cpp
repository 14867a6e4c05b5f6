#include "dsts/simd/kernels.hpp"

namespace dsts::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void accumulate_squared_deviation_scalar(const double* x, const double* mean, double* acc,
                                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - mean[i];
    acc[i] += d * d;
  }
}

}  // namespace

const KernelTable kScalarKernels{Isa::kScalar, &dot_scalar, &axpy_scalar,
                                 &accumulate_squared_deviation_scalar};

}  // namespace dsts::simd::detail
