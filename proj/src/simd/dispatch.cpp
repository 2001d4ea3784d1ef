#include <cstdlib>
#include <string>

#include "regularframe/errors.hpp"
#include "regularframe/simd/kernels.hpp"

namespace regularframe::simd {

std::string isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(REGULARFRAME_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  static const KernelTable scalar_table{Isa::Scalar, &scalar::stencil_row, &scalar::axpy, &scalar::rk4_combine};
#if defined(REGULARFRAME_HAVE_AVX2)
  static const KernelTable avx2_table{Isa::Avx2, &avx2::stencil_row, &avx2::axpy, &avx2::rk4_combine};
#endif
  if (isa == Isa::Scalar) return scalar_table;
  if (!isa_available(isa)) throw ConfigError("instruction set " + isa_name(isa) + " not available on this CPU");
#if defined(REGULARFRAME_HAVE_AVX2)
  return avx2_table;
#else
  return scalar_table;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable& table = [&]() -> const KernelTable& {
    if (const char* env = std::getenv("REGULARFRAME_SIMD")) {
      const std::string want = env;
      if (want == "scalar") return kernels_for(Isa::Scalar);
      if (want == "avx2") return kernels_for(Isa::Avx2);
    }
    return isa_available(Isa::Avx2) ? kernels_for(Isa::Avx2) : kernels_for(Isa::Scalar);
  }();
  return table;
}

}  // namespace regularframe::simd
