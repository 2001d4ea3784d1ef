#include "regularframe/simd/kernels.hpp"

namespace regularframe::simd::scalar {

void stencil_element(const StencilRow& row, std::size_t e) {
  const std::size_t len = row.len;
  const std::size_t right = e + 2 < len ? e + 2 : e + 2 - len;
  const std::size_t left = e >= 2 ? e - 2 : e + len - 2;
  const double c = row.phi[e];
  double lap = row.kx_plus[e] * (row.phi[right] - c) - row.kx_minus[e] * (c - row.phi[left]);
  if (row.y_plus) {
    lap = lap + (row.ky_plus[e] * (row.y_plus[e] - c) - row.ky_minus[e] * (c - row.y_minus[e]));
  }
  if (row.z_plus) {
    lap = lap + (row.kz_plus[e] * (row.z_plus[e] - c) - row.kz_minus[e] * (c - row.z_minus[e]));
  }
  row.out[e] = (lap * row.inv_h2 - row.mass_term[e] * c - row.damping[e] * row.pi[e]) * row.inv_weight[e];
}

void stencil_row(const StencilRow& row) {
  for (std::size_t e = 0; e < row.len; ++e) stencil_element(row, e);
}

void axpy(std::size_t n, const double* x, double a, const double* k, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * k[i];
}

void rk4_combine(std::size_t n, const double* y, double h6, const double* k1, const double* k2, const double* k3,
                 const double* k4, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = k1[i] + 2.0 * k2[i];
    s = s + 2.0 * k3[i];
    s = s + k4[i];
    out[i] = y[i] + h6 * s;
  }
}

}  // namespace regularframe::simd::scalar
