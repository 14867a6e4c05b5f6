#include <cstdlib>
#include <string_view>

#include "dsts/error.hpp"
#include "dsts/simd/kernels.hpp"

namespace dsts::simd {

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("SIMD variant not available on this CPU: ") + isa_name(isa));
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2: return detail::kAvx2Kernels;
#endif
#if defined(__aarch64__)
    case Isa::kNeon: return detail::kNeonKernels;
#endif
    default: return detail::kScalarKernels;
  }
}

namespace {

const KernelTable& select() {
  const char* env = std::getenv("DSTS_SIMD");
  const std::string_view want = env ? env : "auto";
  if (want == "scalar") return detail::kScalarKernels;
  if (want == "avx2") return kernels_for(Isa::kAvx2);
  if (want == "neon") return kernels_for(Isa::kNeon);
  if (isa_supported(Isa::kAvx2)) return kernels_for(Isa::kAvx2);
  if (isa_supported(Isa::kNeon)) return kernels_for(Isa::kNeon);
  return detail::kScalarKernels;
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace dsts::simd
