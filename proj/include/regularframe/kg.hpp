#pragma once

#include <complex>
#include <span>
#include <vector>

#include "regularframe/metric.hpp"
#include "regularframe/simd/kernels.hpp"

namespace regularframe::kg {

using Complex = std::complex<double>;
using ComplexField = std::vector<Complex>;

/// Periodic spatial grid on [-L, L)^dim; suppressed axes (dim = 1) carry
/// constant fields and the metric is sampled at x2 = x3 = 0.
struct GridSpec {
  double half_width = 10.0;  // L
  int n = 64;                // points per active axis
  int dim = 1;               // 1 or 3
  double dt = 0.0;           // 0 means cfl * h
  double cfl = 0.25;

  double h() const { return 2.0 * half_width / n; }
  double time_step() const { return dt > 0.0 ? dt : cfl * h(); }
  std::size_t points() const;
  double coordinate(int i) const { return -half_width + i * h(); }
  /// Spatial position of flat index j (x fastest).
  std::array<double, 3> position(std::size_t j) const;
  /// Cell volume h^dim.
  double cell_volume() const;
  double box_volume() const;

  /// n >= 16, dim in {1, 3}, L > 0, dt <= cfl * h. Throws ConfigError.
  void validate() const;
};

struct FieldState {
  ComplexField phi;
  ComplexField pi;  // d phi / dt
  double t = 0.0;

  static FieldState zero(const GridSpec& grid, double t = 0.0);
};

/// Per-time coefficients of the discrete operator
///   d_t (A pi) = sum_a D_a (K_a D_a phi) - S phi,
/// A = sqrt(det G) / sqrt(-g00) (unit-normal volume weight), K_a = sqrt|g| / g_aa
/// at half points, S = sqrt|g| m^2. Coefficient rows are duplicated per
/// complex component, matching the interleaved field layout.
struct Coefficients {
  double t = 0.0;
  std::vector<double> weight;  // A, one per point
  std::vector<double> k_plus[3];
  std::vector<double> k_minus[3];
  std::vector<double> mass_term;
  std::vector<double> damping;  // d_t A
  std::vector<double> inv_weight;
  double omega_max = 0.0;  // Gershgorin bound on the operator's frequency
};

/// Requires a coordinate-diagonal metric with g00 < 0 and g_aa > 0 on the grid.
Coefficients build_coefficients(const MetricField& metric, double mass, const GridSpec& grid, double t);

struct Derivative {
  ComplexField dphi;
  ComplexField dpi;
};

/// Semi-discrete right-hand side (dphi, dpi) = (pi, ...), periodic wrap.
/// Throws StabilityError when the step violates the CFL bound.
Derivative kg_rhs(const FieldState& state, const MetricField& metric, double mass, const GridSpec& grid);

/// Same, with explicit coefficients and kernel table.
Derivative kg_rhs(const FieldState& state, const Coefficients& coeffs, const GridSpec& grid,
                  const simd::KernelTable& kernels);

struct EvolveOptions {
  const simd::KernelTable* kernels = nullptr;  // null: active kernels
};

/// Classical RK4 from state.t to t_end in ceil(|t_end - t| / dt) equal steps
/// (negative direction allowed). Throws BlowupError on non-finite values.
FieldState evolve(const FieldState& state, const MetricField& metric, double mass, const GridSpec& grid,
                  double t_end, const EvolveOptions& options = {});

/// Evolves several states on the same time grid, sharing the coefficient
/// builds; states are advanced in parallel.
std::vector<FieldState> evolve_many(std::span<const FieldState> states, const MetricField& metric, double mass,
                                    const GridSpec& grid, double t_end, const EvolveOptions& options = {});

/// i sum (conj(f) n.d h - h conj(n.d f)) sqrt(det G) dV at the common slice.
Complex kg_inner_product(const FieldState& f, const FieldState& h, const MetricField& metric, const GridSpec& grid);
Complex kg_inner_product(const FieldState& f, const FieldState& h, const Coefficients& coeffs, const GridSpec& grid);

/// max over `times` of |<f(t), f(t)> - <f(0), f(0)>| / |<f(0), f(0)>|; 0 for a zero field.
double conservation_drift(const FieldState& initial, const MetricField& metric, double mass, const GridSpec& grid,
                          std::span<const double> times);

/// sqrt(sum |a - b|^2) / sqrt(sum |b|^2) over phi and pi together.
double relative_l2_error(const FieldState& a, const FieldState& reference);

}  // namespace regularframe::kg
