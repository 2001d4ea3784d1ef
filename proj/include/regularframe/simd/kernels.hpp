#pragma once

// Inner loops of the Klein-Gordon integrator.
//
// Every kernel exists as a portable scalar reference and, where the CPU
// supports it, an AVX2 variant. Both variants perform the same IEEE
// operations in the same order (the build disables FMA contraction), so
// their results are bitwise identical; tests/test_simd.cpp checks this.
//
// Complex fields are stored interleaved (re, im), so a "row" of n grid
// points is 2n doubles and x-neighbours sit at offset +-2. Coefficient
// rows are duplicated per component and have the same length.

#include <cstddef>
#include <string>

namespace regularframe::simd {

enum class Isa { Scalar, Avx2 };

std::string isa_name(Isa isa);

/// One x-row of the discrete covariant wave operator:
///   out = ( (sum_a Ka+ (u_a+ - u) - Ka- (u - u_a-)) * inv_h2
///           - mass_term * u - damping * pi ) * inv_weight
/// with periodic wrap along x. y/z neighbour rows are null in 1D.
struct StencilRow {
  std::size_t len = 0;  // doubles in the row, even
  const double* phi = nullptr;
  const double* pi = nullptr;
  const double* y_plus = nullptr;
  const double* y_minus = nullptr;
  const double* z_plus = nullptr;
  const double* z_minus = nullptr;
  const double* kx_plus = nullptr;
  const double* kx_minus = nullptr;
  const double* ky_plus = nullptr;
  const double* ky_minus = nullptr;
  const double* kz_plus = nullptr;
  const double* kz_minus = nullptr;
  const double* mass_term = nullptr;
  const double* damping = nullptr;
  const double* inv_weight = nullptr;
  double inv_h2 = 1.0;
  double* out = nullptr;
};

struct KernelTable {
  Isa isa = Isa::Scalar;
  void (*stencil_row)(const StencilRow& row) = nullptr;
  /// out[i] = x[i] + a * k[i]
  void (*axpy)(std::size_t n, const double* x, double a, const double* k, double* out) = nullptr;
  /// out[i] = y[i] + h6 * (((k1[i] + 2 k2[i]) + 2 k3[i]) + k4[i])
  void (*rk4_combine)(std::size_t n, const double* y, double h6, const double* k1, const double* k2,
                      const double* k3, const double* k4, double* out) = nullptr;
};

bool isa_available(Isa isa);

/// Kernels for a specific ISA; throws ConfigError when unavailable.
const KernelTable& kernels_for(Isa isa);

/// Best available ISA, overridable with REGULARFRAME_SIMD=scalar|avx2.
const KernelTable& active_kernels();

namespace scalar {
void stencil_row(const StencilRow& row);
void axpy(std::size_t n, const double* x, double a, const double* k, double* out);
void rk4_combine(std::size_t n, const double* y, double h6, const double* k1, const double* k2, const double* k3,
                 const double* k4, double* out);
/// Boundary elements shared by every variant: computes out[e] for one element.
void stencil_element(const StencilRow& row, std::size_t e);
}  // namespace scalar

#if defined(REGULARFRAME_HAVE_AVX2)
namespace avx2 {
void stencil_row(const StencilRow& row);
void axpy(std::size_t n, const double* x, double a, const double* k, double* out);
void rk4_combine(std::size_t n, const double* y, double h6, const double* k1, const double* k2, const double* k3,
                 const double* k4, double* out);
}  // namespace avx2
#endif

}  // namespace regularframe::simd
