#pragma once

#include <complex>
#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "regularframe/kg.hpp"
#include "regularframe/metric.hpp"

namespace regularframe::shell {

using Complex = std::complex<double>;

/// Finite momentum lattice with uniform cell volume `cell`.
///
/// `momenta` are the momenta entering mu(p) = sqrt(m^2 + p^2). For a lattice
/// tied to a periodic grid (`wave_index` non-empty) each mode is the plane
/// wave exp(i q.x), q = pi k / L, and its momentum is the symbol of the
/// second-order stencil, p_a = (2/h) sin(q_a h / 2), so synthesized modes
/// are exact solutions of the semi-discrete equation.
struct MomentumLattice {
  std::vector<Vec3> momenta;
  std::vector<std::array<int, 3>> wave_index;
  double cell = 1.0;
  // Grid signature when grid-tied.
  int n = 0;
  int dim = 0;
  double half_width = 0.0;

  std::size_t size() const { return momenta.size(); }
  bool grid_tied() const { return !wave_index.empty(); }
  bool matches(const kg::GridSpec& grid) const;
};

using LatticePtr = std::shared_ptr<const MomentumLattice>;

/// Grid-dual Fourier lattice of a periodic grid: n^dim modes, k in [-n/2, n/2).
LatticePtr grid_lattice(const kg::GridSpec& grid);

/// Element of L^2(H_m, mu_m) sampled on a lattice: samples[k] = F(j_m(p_k)).
struct MassShellVector {
  double m = 0.0;
  LatticePtr lattice;
  std::vector<Complex> samples;

  static MassShellVector zero(double m, LatticePtr lattice);
  /// 1 / sqrt(m^2 + p_k^2); infinite at p = 0 when m = 0.
  double weight(std::size_t k) const;
  /// sum_k conj(F_k) G_k w_k cell. Throws LatticeError on a singular nonzero mode.
  Complex inner(const MassShellVector& other) const;
  double norm() const { return std::sqrt(inner(*this).real()); }
};

/// j_m(p) = (sqrt(m^2 + p^2), p).
Vec4 shell_embed(const Vec3& p, double m);

/// mu_m of the image of the box [lo, hi] (nested adaptive Gauss-Kronrod).
/// Throws QuadratureError when the error estimate exceeds `tol`.
double shell_measure_box(const Vec3& lo, const Vec3& hi, double m, double tol = 1e-8);
/// mu_m of the image of the ball |p| < radius, via the radial integral.
double shell_measure_ball(double radius, double m, double tol = 1e-8);

/// Square-integrable function on a lattice, ||f||^2 = sum |f_k|^2 cell.
struct LatticeFunction {
  LatticePtr lattice;
  std::vector<Complex> values;

  double norm() const;
};

/// (J_m f)_k = (m^2 + p_k^2)^{1/4} f_k. Throws LatticeError when m = 0 and the lattice contains p = 0.
MassShellVector j_transform(const LatticeFunction& f, double m);
LatticeFunction j_inverse(const MassShellVector& F);

/// K_m normalization: <K F, K G>_KG = <F, G>_mu for c = 1 / sqrt(2 cell V),
/// which on the grid-dual lattice (cell * V = (2 pi)^dim) is (2 pi)^{-dim/2} / sqrt(2).
double synthesis_constant(int dim);

/// Positive-frequency Minkowski solution at time t:
///   phi(x) = c sum_k cell w_k F_k exp(-i (mu_k t - q_k.x)),  pi = d phi / dt.
/// Throws LatticeError when F's lattice is not the grid's dual lattice.
kg::FieldState synthesize(const MassShellVector& F, const kg::GridSpec& grid, double t);

/// Same with an explicit normalization constant (used to calibrate c).
kg::FieldState synthesize_with_constant(const MassShellVector& F, const kg::GridSpec& grid, double t, double c);

/// Continuum positive-frequency solution with the same samples: each mode
/// uses the exact dispersion mu(q) = sqrt(m^2 + q^2) instead of the stencil symbol.
/// Reference for the spatial discretization error.
kg::FieldState synthesize_continuum(const MassShellVector& F, const kg::GridSpec& grid, double t);

/// Wave-packet descriptions shared by the evolve and transport pipelines.
struct PlaneMode {
  Vec3 p = Vec3::Zero();  // wave vector, must lie on the grid-dual lattice
  Complex amp = 1.0;
};

struct GaussianProfile {
  Vec3 center = Vec3::Zero();
  double width = 1.0;
  Vec3 p0 = Vec3::Zero();
  Complex amp = 1.0;
};

struct PacketSpec {
  std::vector<PlaneMode> modes;          // used when `gaussian` is empty
  std::optional<GaussianProfile> gaussian;
};

/// F_k for the packet on the grid's dual lattice. Gaussian: amp exp(-|q - p0|^2 w^2 / 2 - i q.center).
MassShellVector make_packet(const PacketSpec& spec, const kg::GridSpec& grid, double m);

PacketSpec packet_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::ordered_json packet_to_json(const PacketSpec& spec);

/// Modified Gram-Schmidt in the mu_m product.
std::vector<MassShellVector> orthonormalize(std::vector<MassShellVector> basis);

}  // namespace regularframe::shell
