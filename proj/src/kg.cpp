#include "regularframe/kg.hpp"

#include <cmath>

#include "regularframe/errors.hpp"
#include "regularframe/parallel.hpp"

namespace regularframe::kg {

std::size_t GridSpec::points() const {
  std::size_t p = 1;
  for (int a = 0; a < dim; ++a) p *= static_cast<std::size_t>(n);
  return p;
}

std::array<double, 3> GridSpec::position(std::size_t j) const {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    x[a] = coordinate(static_cast<int>(j % n));
    j /= n;
  }
  return x;
}

double GridSpec::cell_volume() const { return std::pow(h(), dim); }
double GridSpec::box_volume() const { return std::pow(2.0 * half_width, dim); }

void GridSpec::validate() const {
  if (n < 16) throw ConfigError("grid needs n >= 16 points per axis");
  if (dim != 1 && dim != 3) throw ConfigError("grid dim must be 1 or 3");
  if (!(half_width > 0.0)) throw ConfigError("grid half-width must be positive");
  if (!(cfl > 0.0)) throw ConfigError("cfl must be positive");
  if (dt < 0.0) throw ConfigError("dt must be positive (or 0 for cfl * h)");
}

FieldState FieldState::zero(const GridSpec& grid, double t) {
  return {ComplexField(grid.points()), ComplexField(grid.points()), t};
}

namespace {

double volume_weight(const Mat4& g) { return std::sqrt(g(1, 1) * g(2, 2) * g(3, 3)) / std::sqrt(-g(0, 0)); }

Mat4 checked_diagonal(const MetricField& metric, const SpacetimePoint& p) {
  const Mat4 g = metric.evaluate(p);
  const double scale = std::max(1.0, g.diagonal().cwiseAbs().maxCoeff());
  const double off = (g - Mat4(g.diagonal().asDiagonal())).cwiseAbs().maxCoeff();
  if (off > 1e-12 * scale) throw ConfigError("Klein-Gordon solver requires a coordinate-diagonal metric");
  if (!(g(0, 0) < 0.0)) throw NotGloballyHyperbolicHereError("g00 >= 0 on the grid");
  if (!(g(1, 1) > 0.0 && g(2, 2) > 0.0 && g(3, 3) > 0.0)) throw SignatureError("spatial metric not positive on the grid");
  return g;
}

double weight_rate(const MetricField& metric, const SpacetimePoint& p, const Mat4& g, double weight) {
  if (metric.is_static()) return 0.0;
  if (metric.has_analytic_derivative()) {
    const Mat4 dt = metric.derivative(p)[0];
    return weight * 0.5 * (dt(1, 1) / g(1, 1) + dt(2, 2) / g(2, 2) + dt(3, 3) / g(3, 3) - dt(0, 0) / g(0, 0));
  }
  constexpr double d = 1e-3;
  auto at = [&](double t) {
    SpacetimePoint q = p;
    q.t = t;
    return volume_weight(checked_diagonal(metric, q));
  };
  return (at(p.t - 2.0 * d) - 8.0 * at(p.t - d) + 8.0 * at(p.t + d) - at(p.t + 2.0 * d)) / (12.0 * d);
}

std::vector<double> duplicated(const std::vector<double>& v) {
  std::vector<double> out(2 * v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[2 * i] = out[2 * i + 1] = v[i];
  return out;
}

std::size_t stride(const GridSpec& grid, int axis) {
  std::size_t s = 1;
  for (int a = 0; a < axis; ++a) s *= grid.n;
  return s;
}

/// Flat index of the neighbour of j one step along `axis` (periodic).
std::size_t neighbour(const GridSpec& grid, std::size_t j, int axis, int dir) {
  const std::size_t s = stride(grid, axis);
  const std::size_t i = (j / s) % grid.n;
  const std::size_t wrapped = dir > 0 ? (i + 1) % grid.n : (i + grid.n - 1) % grid.n;
  return j - i * s + wrapped * s;
}

void check_step(const GridSpec& grid, const Coefficients& c, double step) {
  const double dt = std::abs(step);
  if (dt > grid.cfl * grid.h() * (1.0 + 1e-12)) {
    throw StabilityError("time step " + std::to_string(dt) + " exceeds cfl * h = " + std::to_string(grid.cfl * grid.h()));
  }
  // RK4 is stable on the imaginary axis up to 2 sqrt(2).
  if (dt * c.omega_max > 2.8) throw StabilityError("time step exceeds the RK4 stability bound of the operator");
}

/// dpi for the packed (phi, pi) vector; both halves are 2N doubles.
void apply_operator(const double* phi, const double* pi, const Coefficients& c, const GridSpec& grid,
                    const simd::KernelTable& kernels, double* out) {
  const std::size_t row_points = static_cast<std::size_t>(grid.n);
  const std::size_t rows = grid.points() / row_points;
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t j0 = r * row_points;
    const std::size_t e0 = 2 * j0;
    simd::StencilRow row;
    row.len = 2 * row_points;
    row.phi = phi + e0;
    row.pi = pi + e0;
    row.kx_plus = c.k_plus[0].data() + e0;
    row.kx_minus = c.k_minus[0].data() + e0;
    if (grid.dim == 3) {
      row.y_plus = phi + 2 * neighbour(grid, j0, 1, +1);
      row.y_minus = phi + 2 * neighbour(grid, j0, 1, -1);
      row.z_plus = phi + 2 * neighbour(grid, j0, 2, +1);
      row.z_minus = phi + 2 * neighbour(grid, j0, 2, -1);
      row.ky_plus = c.k_plus[1].data() + e0;
      row.ky_minus = c.k_minus[1].data() + e0;
      row.kz_plus = c.k_plus[2].data() + e0;
      row.kz_minus = c.k_minus[2].data() + e0;
    }
    row.mass_term = c.mass_term.data() + e0;
    row.damping = c.damping.data() + e0;
    row.inv_weight = c.inv_weight.data() + e0;
    row.inv_h2 = inv_h2;
    row.out = out + e0;
    kernels.stencil_row(row);
  }
}

const double* as_doubles(const ComplexField& v) { return reinterpret_cast<const double*>(v.data()); }
double* as_doubles(ComplexField& v) { return reinterpret_cast<double*>(v.data()); }

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

Coefficients build_coefficients(const MetricField& metric, double mass, const GridSpec& grid, double t) {
  grid.validate();
  if (!(mass >= 0.0)) throw ConfigError("mass must be nonnegative");
  const std::size_t np = grid.points();
  Coefficients c;
  c.t = t;
  c.weight.resize(np);
  std::vector<double> mass_term(np), damping(np), inv_weight(np);
  std::vector<double> k_plus[3];
  for (std::size_t j = 0; j < np; ++j) {
    const SpacetimePoint p{t, grid.position(j)};
    const Mat4 g = checked_diagonal(metric, p);
    const double w = volume_weight(g);
    c.weight[j] = w;
    inv_weight[j] = 1.0 / w;
    mass_term[j] = std::sqrt(-g(0, 0) * g(1, 1) * g(2, 2) * g(3, 3)) * mass * mass;
    damping[j] = weight_rate(metric, p, g, w);
  }
  for (int a = 0; a < grid.dim; ++a) {
    k_plus[a].resize(np);
    for (std::size_t j = 0; j < np; ++j) {
      SpacetimePoint p{t, grid.position(j)};
      p.x[a] += 0.5 * grid.h();
      const Mat4 g = checked_diagonal(metric, p);
      k_plus[a][j] = std::sqrt(-g(0, 0) * g(1, 1) * g(2, 2) * g(3, 3)) / g(a + 1, a + 1);
    }
  }
  double omega2 = 0.0;
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  std::vector<double> k_minus[3];
  for (int a = 0; a < grid.dim; ++a) {
    k_minus[a].resize(np);
    for (std::size_t j = 0; j < np; ++j) k_minus[a][j] = k_plus[a][neighbour(grid, j, a, -1)];
  }
  for (std::size_t j = 0; j < np; ++j) {
    double flux = 0.0;
    for (int a = 0; a < grid.dim; ++a) flux += k_plus[a][j] + k_minus[a][j];
    omega2 = std::max(omega2, (2.0 * flux * inv_h2 + mass_term[j]) * inv_weight[j]);
  }
  c.omega_max = std::sqrt(omega2);
  for (int a = 0; a < grid.dim; ++a) {
    c.k_plus[a] = duplicated(k_plus[a]);
    c.k_minus[a] = duplicated(k_minus[a]);
  }
  c.mass_term = duplicated(mass_term);
  c.damping = duplicated(damping);
  c.inv_weight = duplicated(inv_weight);
  return c;
}

Derivative kg_rhs(const FieldState& state, const Coefficients& coeffs, const GridSpec& grid,
                  const simd::KernelTable& kernels) {
  if (state.phi.size() != grid.points() || state.pi.size() != grid.points()) {
    throw ConfigError("field shape does not match the grid");
  }
  Derivative d{state.pi, ComplexField(grid.points())};
  apply_operator(as_doubles(state.phi), as_doubles(state.pi), coeffs, grid, kernels, as_doubles(d.dpi));
  for (const auto& v : d.dpi) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw BlowupError("non-finite right-hand side");
  }
  return d;
}

Derivative kg_rhs(const FieldState& state, const MetricField& metric, double mass, const GridSpec& grid) {
  const auto coeffs = build_coefficients(metric, mass, grid, state.t);
  check_step(grid, coeffs, grid.time_step());
  return kg_rhs(state, coeffs, grid, simd::active_kernels());
}

namespace {

/// Packed state: [phi (2N doubles), pi (2N doubles)].
struct Packed {
  std::vector<double> y;
  explicit Packed(std::size_t np) : y(4 * np) {}
  double* phi() { return y.data(); }
  double* pi() { return y.data() + y.size() / 2; }
};

void packed_rhs(const std::vector<double>& y, const Coefficients& c, const GridSpec& grid,
                const simd::KernelTable& kernels, std::vector<double>& k) {
  const std::size_t half = y.size() / 2;
  std::copy(y.begin() + half, y.end(), k.begin());
  apply_operator(y.data(), y.data() + half, c, grid, kernels, k.data() + half);
}

void rk4_step(std::vector<double>& y, double step, const Coefficients& c0, const Coefficients& c_mid,
              const Coefficients& c1, const GridSpec& grid, const simd::KernelTable& kern) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  packed_rhs(y, c0, grid, kern, k1);
  kern.axpy(n, y.data(), 0.5 * step, k1.data(), tmp.data());
  packed_rhs(tmp, c_mid, grid, kern, k2);
  kern.axpy(n, y.data(), 0.5 * step, k2.data(), tmp.data());
  packed_rhs(tmp, c_mid, grid, kern, k3);
  kern.axpy(n, y.data(), step, k3.data(), tmp.data());
  packed_rhs(tmp, c1, grid, kern, k4);
  kern.rk4_combine(n, y.data(), step / 6.0, k1.data(), k2.data(), k3.data(), k4.data(), y.data());
}

}  // namespace

std::vector<FieldState> evolve_many(std::span<const FieldState> states, const MetricField& metric, double mass,
                                    const GridSpec& grid, double t_end, const EvolveOptions& options) {
  grid.validate();
  const auto& kernels = options.kernels ? *options.kernels : simd::active_kernels();
  std::vector<FieldState> out(states.begin(), states.end());
  if (out.empty()) return out;
  const double t0 = out.front().t;
  const std::size_t np = grid.points();
  for (const auto& s : out) {
    if (s.t != t0) throw SliceError("evolve_many needs states on a common slice");
    if (s.phi.size() != np || s.pi.size() != np) throw ConfigError("field shape does not match the grid");
  }
  const double span = t_end - t0;
  const double dt = grid.time_step();
  const long steps = static_cast<long>(std::ceil(std::abs(span) / dt - 1e-9));
  if (steps <= 0) return out;
  const double step = span / static_cast<double>(steps);

  std::vector<Packed> packed;
  packed.reserve(out.size());
  for (const auto& s : out) {
    Packed p(np);
    std::copy_n(as_doubles(s.phi), 2 * np, p.phi());
    std::copy_n(as_doubles(s.pi), 2 * np, p.pi());
    packed.push_back(std::move(p));
  }

  const bool is_static = metric.is_static();
  Coefficients c0 = build_coefficients(metric, mass, grid, t0);
  check_step(grid, c0, step);
  for (long k = 0; k < steps; ++k) {
    const double ta = t0 + static_cast<double>(k) * step;
    const double tb = t0 + static_cast<double>(k + 1) * step;
    if (!is_static && c0.t != ta) c0 = build_coefficients(metric, mass, grid, ta);
    const Coefficients c_mid = is_static ? c0 : build_coefficients(metric, mass, grid, ta + 0.5 * step);
    Coefficients c1 = is_static ? c0 : build_coefficients(metric, mass, grid, tb);
    if (!is_static) {
      check_step(grid, c_mid, step);
      check_step(grid, c1, step);
    }
    parallel_for(packed.size(), [&](std::size_t i) {
      rk4_step(packed[i].y, step, c0, c_mid, c1, grid, kernels);
      if (!all_finite(packed[i].y)) throw BlowupError("field became non-finite at t = " + std::to_string(tb));
    });
    if (!is_static) c0 = std::move(c1);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::copy_n(packed[i].phi(), 2 * np, as_doubles(out[i].phi));
    std::copy_n(packed[i].pi(), 2 * np, as_doubles(out[i].pi));
    out[i].t = t_end;
  }
  return out;
}

FieldState evolve(const FieldState& state, const MetricField& metric, double mass, const GridSpec& grid,
                  double t_end, const EvolveOptions& options) {
  return evolve_many(std::span<const FieldState>(&state, 1), metric, mass, grid, t_end, options).front();
}

Complex kg_inner_product(const FieldState& f, const FieldState& h, const Coefficients& coeffs, const GridSpec& grid) {
  if (std::abs(f.t - h.t) > 1e-12 * std::max(1.0, std::abs(f.t))) {
    throw SliceError("inner product of states on different slices");
  }
  const std::size_t np = grid.points();
  if (f.phi.size() != np || h.phi.size() != np || f.pi.size() != np || h.pi.size() != np) {
    throw SliceError("state shape does not match the grid");
  }
  ComplexField terms(np);
  const Complex i(0.0, 1.0);
  for (std::size_t j = 0; j < np; ++j) {
    terms[j] = i * (std::conj(f.phi[j]) * h.pi[j] - h.phi[j] * std::conj(f.pi[j])) * coeffs.weight[j];
  }
  return pairwise_sum(std::span<const Complex>(terms)) * grid.cell_volume();
}

Complex kg_inner_product(const FieldState& f, const FieldState& h, const MetricField& metric, const GridSpec& grid) {
  return kg_inner_product(f, h, build_coefficients(metric, 0.0, grid, f.t), grid);
}

double conservation_drift(const FieldState& initial, const MetricField& metric, double mass, const GridSpec& grid,
                          std::span<const double> times) {
  const double n0 = kg_inner_product(initial, initial, metric, grid).real();
  if (n0 == 0.0) return 0.0;
  double drift = 0.0;
  FieldState s = initial;
  for (double t : times) {
    s = evolve(s, metric, mass, grid, t);
    const double nt = kg_inner_product(s, s, metric, grid).real();
    drift = std::max(drift, std::abs(nt - n0) / std::abs(n0));
  }
  return drift;
}

double relative_l2_error(const FieldState& a, const FieldState& reference) {
  if (a.phi.size() != reference.phi.size() || a.pi.size() != reference.pi.size()) {
    throw SliceError("state shapes differ");
  }
  std::vector<double> diff, ref;
  diff.reserve(2 * a.phi.size());
  ref.reserve(2 * a.phi.size());
  for (std::size_t j = 0; j < a.phi.size(); ++j) {
    diff.push_back(std::norm(a.phi[j] - reference.phi[j]) + std::norm(a.pi[j] - reference.pi[j]));
    ref.push_back(std::norm(reference.phi[j]) + std::norm(reference.pi[j]));
  }
  const double r = pairwise_sum(std::span<const double>(ref));
  const double d = pairwise_sum(std::span<const double>(diff));
  if (r == 0.0) return std::sqrt(d);
  return std::sqrt(d / r);
}

}  // namespace regularframe::kg
