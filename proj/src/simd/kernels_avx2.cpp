// Compiled with -mavx2 (and without -mfma); only called after a runtime CPU check.

#include <immintrin.h>

#include "regularframe/simd/kernels.hpp"

namespace regularframe::simd::avx2 {

void stencil_row(const StencilRow& row) {
  const std::size_t len = row.len;
  if (len < 8) {
    scalar::stencil_row(row);
    return;
  }
  // Elements whose x-neighbours wrap go through the shared scalar path.
  std::size_t e = 0;
  for (; e < 2 && e < len; ++e) scalar::stencil_element(row, e);

  const __m256d inv_h2 = _mm256_set1_pd(row.inv_h2);
  for (; e + 4 <= len - 2; e += 4) {
    const __m256d c = _mm256_loadu_pd(row.phi + e);
    const __m256d right = _mm256_loadu_pd(row.phi + e + 2);
    const __m256d left = _mm256_loadu_pd(row.phi + e - 2);
    __m256d lap = _mm256_sub_pd(_mm256_mul_pd(_mm256_loadu_pd(row.kx_plus + e), _mm256_sub_pd(right, c)),
                                _mm256_mul_pd(_mm256_loadu_pd(row.kx_minus + e), _mm256_sub_pd(c, left)));
    if (row.y_plus) {
      const __m256d t = _mm256_sub_pd(
          _mm256_mul_pd(_mm256_loadu_pd(row.ky_plus + e), _mm256_sub_pd(_mm256_loadu_pd(row.y_plus + e), c)),
          _mm256_mul_pd(_mm256_loadu_pd(row.ky_minus + e), _mm256_sub_pd(c, _mm256_loadu_pd(row.y_minus + e))));
      lap = _mm256_add_pd(lap, t);
    }
    if (row.z_plus) {
      const __m256d t = _mm256_sub_pd(
          _mm256_mul_pd(_mm256_loadu_pd(row.kz_plus + e), _mm256_sub_pd(_mm256_loadu_pd(row.z_plus + e), c)),
          _mm256_mul_pd(_mm256_loadu_pd(row.kz_minus + e), _mm256_sub_pd(c, _mm256_loadu_pd(row.z_minus + e))));
      lap = _mm256_add_pd(lap, t);
    }
    __m256d r = _mm256_sub_pd(_mm256_mul_pd(lap, inv_h2), _mm256_mul_pd(_mm256_loadu_pd(row.mass_term + e), c));
    r = _mm256_sub_pd(r, _mm256_mul_pd(_mm256_loadu_pd(row.damping + e), _mm256_loadu_pd(row.pi + e)));
    _mm256_storeu_pd(row.out + e, _mm256_mul_pd(r, _mm256_loadu_pd(row.inv_weight + e)));
  }
  for (; e < len; ++e) scalar::stencil_element(row, e);
}

void axpy(std::size_t n, const double* x, double a, const double* k, double* out) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_mul_pd(av, _mm256_loadu_pd(k + i))));
  }
  for (; i < n; ++i) out[i] = x[i] + a * k[i];
}

void rk4_combine(std::size_t n, const double* y, double h6, const double* k1, const double* k2, const double* k3,
                 const double* k4, double* out) {
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d hv = _mm256_set1_pd(h6);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_mul_pd(two, _mm256_loadu_pd(k2 + i)));
    s = _mm256_add_pd(s, _mm256_mul_pd(two, _mm256_loadu_pd(k3 + i)));
    s = _mm256_add_pd(s, _mm256_loadu_pd(k4 + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(hv, s)));
  }
  scalar::rk4_combine(n - i, y + i, h6, k1 + i, k2 + i, k3 + i, k4 + i, out + i);
}

}  // namespace regularframe::simd::avx2
