#include "regularframe/mass_shell.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "regularframe/errors.hpp"
#include "regularframe/parallel.hpp"

namespace regularframe::shell {

using nlohmann::json;
using nlohmann::ordered_json;

bool MomentumLattice::matches(const kg::GridSpec& grid) const {
  return grid_tied() && n == grid.n && dim == grid.dim && half_width == grid.half_width;
}

LatticePtr grid_lattice(const kg::GridSpec& grid) {
  grid.validate();
  auto lat = std::make_shared<MomentumLattice>();
  lat->n = grid.n;
  lat->dim = grid.dim;
  lat->half_width = grid.half_width;
  lat->cell = std::pow(std::numbers::pi / grid.half_width, grid.dim);
  const std::size_t modes = grid.points();
  lat->momenta.reserve(modes);
  lat->wave_index.reserve(modes);
  const double h = grid.h();
  for (std::size_t flat = 0; flat < modes; ++flat) {
    std::array<int, 3> k{0, 0, 0};
    Vec3 p = Vec3::Zero();
    std::size_t rest = flat;
    for (int a = 0; a < grid.dim; ++a) {
      k[a] = static_cast<int>(rest % grid.n) - grid.n / 2;
      rest /= grid.n;
      const double q = std::numbers::pi * k[a] / grid.half_width;
      p[a] = (2.0 / h) * std::sin(0.5 * q * h);
    }
    lat->wave_index.push_back(k);
    lat->momenta.push_back(p);
  }
  return lat;
}

MassShellVector MassShellVector::zero(double m, LatticePtr lattice) {
  if (!(m >= 0.0)) throw ConfigError("mass must be nonnegative");
  const std::size_t n = lattice->size();
  return {m, std::move(lattice), std::vector<Complex>(n)};
}

double MassShellVector::weight(std::size_t k) const {
  const double mu = std::sqrt(m * m + lattice->momenta[k].squaredNorm());
  return 1.0 / mu;
}

Complex MassShellVector::inner(const MassShellVector& other) const {
  if (lattice != other.lattice && !(lattice->momenta == other.lattice->momenta && lattice->cell == other.lattice->cell)) {
    throw LatticeError("mass-shell vectors live on different lattices");
  }
  if (m != other.m) throw LatticeError("mass-shell vectors have different masses");
  std::vector<Complex> terms(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Complex prod = std::conj(samples[k]) * other.samples[k];
    if (prod == Complex(0.0)) continue;
    const double w = weight(k);
    if (!std::isfinite(w)) throw LatticeError("nonzero amplitude on the singular mode p = 0 at m = 0");
    terms[k] = prod * w;
  }
  return pairwise_sum(std::span<const Complex>(terms)) * lattice->cell;
}

Vec4 shell_embed(const Vec3& p, double m) { return {std::sqrt(m * m + p.squaredNorm()), p[0], p[1], p[2]}; }

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
constexpr unsigned kMaxDepth = 15;
// Nested adaptive rules multiply their refinement; past this many integrand
// calls the tolerance is treated as unreachable.
constexpr std::size_t kMaxEvaluations = 20'000'000;

}  // namespace

double shell_measure_box(const Vec3& lo, const Vec3& hi, double m, double tol) {
  for (int a = 0; a < 3; ++a) {
    if (!(lo[a] <= hi[a])) throw ConfigError("measure box needs lo <= hi");
    if (!std::isfinite(lo[a]) || !std::isfinite(hi[a])) throw ConfigError("measure box must be bounded");
  }
  if (lo[0] == hi[0] || lo[1] == hi[1] || lo[2] == hi[2]) return 0.0;
  const double inner_tol = tol * 1e-2;
  double worst_inner = 0.0;
  std::size_t evaluations = 0;
  auto innermost = [&](double x, double y) {
    double err = 0.0;
    const double v = Kronrod::integrate(
        [&](double z) {
          if (++evaluations > kMaxEvaluations) {
            throw QuadratureError("box measure exceeded " + std::to_string(kMaxEvaluations) +
                                  " evaluations before reaching tolerance");
          }
          const double r2 = m * m + x * x + y * y + z * z;
          return r2 > 0.0 ? 1.0 / std::sqrt(r2) : 0.0;
        },
        lo[2], hi[2], kMaxDepth, inner_tol, &err);
    worst_inner = std::max(worst_inner, err);
    return v;
  };
  auto middle = [&](double x) {
    double err = 0.0;
    const double v = Kronrod::integrate([&](double y) { return innermost(x, y); }, lo[1], hi[1], kMaxDepth, inner_tol, &err);
    worst_inner = std::max(worst_inner, err);
    return v;
  };
  double err = 0.0;
  const double value = Kronrod::integrate(middle, lo[0], hi[0], kMaxDepth, tol, &err);
  const double scale = std::max(1.0, std::abs(value));
  if (!(err <= tol * scale) || !std::isfinite(value)) {
    throw QuadratureError("box measure error estimate " + std::to_string(err) + " exceeds tolerance");
  }
  return value;
}

double shell_measure_ball(double radius, double m, double tol) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw ConfigError("ball radius must be finite and nonnegative");
  if (radius == 0.0) return 0.0;
  double err = 0.0;
  const double value = Kronrod::integrate(
      [&](double r) {
        const double mu = std::sqrt(m * m + r * r);
        return mu > 0.0 ? 4.0 * std::numbers::pi * r * r / mu : 0.0;
      },
      0.0, radius, kMaxDepth, tol, &err);
  if (!(err <= tol * std::max(1.0, std::abs(value)))) {
    throw QuadratureError("ball measure error estimate " + std::to_string(err) + " exceeds tolerance");
  }
  return value;
}

double LatticeFunction::norm() const {
  std::vector<double> terms(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) terms[k] = std::norm(values[k]);
  return std::sqrt(pairwise_sum(std::span<const double>(terms)) * lattice->cell);
}

MassShellVector j_transform(const LatticeFunction& f, double m) {
  if (f.values.size() != f.lattice->size()) throw LatticeError("function does not match its lattice");
  auto F = MassShellVector::zero(m, f.lattice);
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const double mu2 = m * m + f.lattice->momenta[k].squaredNorm();
    if (mu2 == 0.0) throw LatticeError("m = 0 lattice must exclude p = 0");
    F.samples[k] = std::pow(mu2, 0.25) * f.values[k];
  }
  return F;
}

LatticeFunction j_inverse(const MassShellVector& F) {
  LatticeFunction f{F.lattice, std::vector<Complex>(F.samples.size())};
  for (std::size_t k = 0; k < F.samples.size(); ++k) {
    const double mu2 = F.m * F.m + F.lattice->momenta[k].squaredNorm();
    if (mu2 == 0.0) throw LatticeError("m = 0 lattice must exclude p = 0");
    f.values[k] = F.samples[k] / std::pow(mu2, 0.25);
  }
  return f;
}

double synthesis_constant(int dim) { return std::pow(2.0 * std::numbers::pi, -0.5 * dim) / std::sqrt(2.0); }

namespace {

kg::FieldState synthesize_modes(const MassShellVector& F, const kg::GridSpec& grid, double t, double c, bool continuum) {
  if (!F.lattice->matches(grid)) throw LatticeError("mass-shell vector is not on the grid's dual lattice");
  auto state = kg::FieldState::zero(grid, t);
  const int n = grid.n;
  // phase[k + n/2][i] = exp(i q_k x_i) along one axis.
  std::vector<std::vector<Complex>> phase(n, std::vector<Complex>(n));
  for (int k = 0; k < n; ++k) {
    const double q = std::numbers::pi * (k - n / 2) / grid.half_width;
    for (int i = 0; i < n; ++i) phase[k][i] = std::polar(1.0, q * grid.coordinate(i));
  }
  const std::size_t np = grid.points();
  for (std::size_t mode = 0; mode < F.samples.size(); ++mode) {
    if (F.samples[mode] == Complex(0.0)) continue;
    const auto& k = F.lattice->wave_index[mode];
    double w = F.weight(mode);
    if (continuum) {
      double q2 = 0.0;
      for (int ax = 0; ax < grid.dim; ++ax) q2 += std::pow(std::numbers::pi * k[ax] / grid.half_width, 2);
      w = 1.0 / std::sqrt(F.m * F.m + q2);
    }
    if (!std::isfinite(w)) throw LatticeError("nonzero amplitude on the singular mode p = 0 at m = 0");
    const double mu = 1.0 / w;
    const Complex a = c * F.lattice->cell * w * F.samples[mode] * std::polar(1.0, -mu * t);
    const Complex da = Complex(0.0, -mu) * a;
    for (std::size_t j = 0; j < np; ++j) {
      std::size_t rest = j;
      Complex e = 1.0;
      for (int ax = 0; ax < grid.dim; ++ax) {
        e *= phase[k[ax] + n / 2][rest % n];
        rest /= n;
      }
      state.phi[j] += a * e;
      state.pi[j] += da * e;
    }
  }
  return state;
}

}  // namespace

kg::FieldState synthesize_with_constant(const MassShellVector& F, const kg::GridSpec& grid, double t, double c) {
  return synthesize_modes(F, grid, t, c, false);
}

kg::FieldState synthesize_continuum(const MassShellVector& F, const kg::GridSpec& grid, double t) {
  return synthesize_modes(F, grid, t, synthesis_constant(grid.dim), true);
}

kg::FieldState synthesize(const MassShellVector& F, const kg::GridSpec& grid, double t) {
  return synthesize_with_constant(F, grid, t, synthesis_constant(grid.dim));
}

MassShellVector make_packet(const PacketSpec& spec, const kg::GridSpec& grid, double m) {
  auto F = MassShellVector::zero(m, grid_lattice(grid));
  const auto& lat = *F.lattice;
  if (spec.gaussian) {
    const auto& g = *spec.gaussian;
    if (!(g.width > 0.0)) throw ConfigError("packet width must be positive");
    for (std::size_t k = 0; k < lat.size(); ++k) {
      Vec3 q = Vec3::Zero();
      for (int a = 0; a < grid.dim; ++a) q[a] = std::numbers::pi * lat.wave_index[k][a] / grid.half_width;
      const double envelope = -0.5 * (q - g.p0).squaredNorm() * g.width * g.width;
      F.samples[k] = g.amp * std::exp(envelope) * std::polar(1.0, -q.dot(g.center));
    }
    return F;
  }
  const int n = grid.n;
  for (const auto& mode : spec.modes) {
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (int a = 0; a < 3; ++a) {
      const double kf = mode.p[a] * grid.half_width / std::numbers::pi;
      const double kr = std::round(kf);
      if (std::abs(kf - kr) > 1e-9) throw LatticeError("mode momentum is incommensurate with the periodic grid");
      if (a >= grid.dim) {
        if (kr != 0.0) throw LatticeError("mode momentum along a suppressed axis");
        continue;
      }
      const int k = static_cast<int>(kr);
      if (k < -n / 2 || k >= n / 2) throw LatticeError("mode momentum beyond the grid's Nyquist range");
      flat += static_cast<std::size_t>(k + n / 2) * stride;
      stride *= n;
    }
    F.samples[flat] += mode.amp;
  }
  return F;
}

namespace {

Vec3 vec3_at(const json& v, const std::string& where) {
  Vec3 out = Vec3::Zero();
  if (v.is_number()) {
    out[0] = v.get<double>();
    return out;
  }
  if (!v.is_array() || v.empty() || v.size() > 3) throw SchemaError(where + ": expected a number or 1-3 numbers");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw SchemaError(where + "[" + std::to_string(i) + "]: expected a number");
    out[i] = v[i].get<double>();
  }
  return out;
}

Complex complex_at(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw SchemaError(where + ": expected [re, im]");
}

}  // namespace

PacketSpec packet_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  PacketSpec spec;
  const json* gauss = nullptr;
  if (j.contains("gaussian")) gauss = &j.at("gaussian");
  else if (j.contains("width") || j.contains("center") || j.contains("p0")) gauss = &j;
  if (gauss) {
    const std::string gw = gauss == &j ? where : where + ".gaussian";
    if (!gauss->is_object()) throw SchemaError(gw + ": expected an object");
    GaussianProfile g;
    if (gauss->contains("center")) g.center = vec3_at(gauss->at("center"), gw + ".center");
    if (gauss->contains("p0")) g.p0 = vec3_at(gauss->at("p0"), gw + ".p0");
    if (gauss->contains("width")) {
      if (!gauss->at("width").is_number()) throw SchemaError(gw + ".width: expected a number");
      g.width = gauss->at("width").get<double>();
    }
    if (!(g.width > 0.0)) throw SchemaError(gw + ".width: must be positive");
    if (gauss->contains("amp")) g.amp = complex_at(gauss->at("amp"), gw + ".amp");
    spec.gaussian = g;
    return spec;
  }
  if (!j.contains("modes")) throw SchemaError(where + ": expected 'modes' or a Gaussian profile");
  const auto& modes = j.at("modes");
  if (!modes.is_array()) throw SchemaError(where + ".modes: expected an array");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string mw = where + ".modes[" + std::to_string(i) + "]";
    if (!modes[i].is_object() || !modes[i].contains("p")) throw SchemaError(mw + ": expected {\"p\": [...], \"amp\": [re, im]}");
    PlaneMode mode;
    mode.p = vec3_at(modes[i].at("p"), mw + ".p");
    if (modes[i].contains("amp")) mode.amp = complex_at(modes[i].at("amp"), mw + ".amp");
    spec.modes.push_back(mode);
  }
  return spec;
}

ordered_json packet_to_json(const PacketSpec& spec) {
  auto v3 = [](const Vec3& v) { return ordered_json::array({v[0], v[1], v[2]}); };
  if (spec.gaussian) {
    const auto& g = *spec.gaussian;
    return {{"center", v3(g.center)}, {"width", g.width}, {"p0", v3(g.p0)}, {"amp", {g.amp.real(), g.amp.imag()}}};
  }
  ordered_json modes = ordered_json::array();
  for (const auto& m : spec.modes) modes.push_back({{"p", v3(m.p)}, {"amp", {m.amp.real(), m.amp.imag()}}});
  return {{"modes", modes}};
}

std::vector<MassShellVector> orthonormalize(std::vector<MassShellVector> basis) {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const Complex proj = basis[j].inner(basis[i]);
      for (std::size_t k = 0; k < basis[i].samples.size(); ++k) basis[i].samples[k] -= proj * basis[j].samples[k];
    }
    const double nrm = basis[i].norm();
    if (!(nrm > 0.0)) throw LatticeError("basis is linearly dependent");
    for (auto& s : basis[i].samples) s /= nrm;
  }
  return basis;
}

}  // namespace regularframe::shell
