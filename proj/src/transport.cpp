#include "regularframe/transport.hpp"

#include <algorithm>
#include <cmath>

#include "regularframe/errors.hpp"

namespace regularframe::transport {

void TransportScenario::validate() const {
  if (!base) throw ConfigError("transport scenario needs a base metric");
  if (!(t_start < t1 && t1 < t2 && t2 < t_end)) throw ConfigError("transport needs t_start < t1 < t2 < t_end");
  if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("mass must be finite and nonnegative");
  grid.validate();
}

std::shared_ptr<const interp::InterpolatedMetric> TransportScenario::interpolated() const {
  return std::make_shared<interp::InterpolatedMetric>(base, interp::TransitionFunction(t1, t2));
}

std::vector<shell::MassShellVector> TransportScenario::basis_vectors() const {
  std::vector<shell::MassShellVector> out;
  out.reserve(basis.size());
  for (const auto& spec : basis) out.push_back(shell::make_packet(spec, grid, m));
  if (orthonormal && !out.empty()) out = shell::orthonormalize(std::move(out));
  return out;
}

TransportScenario TransportScenario::with_grid_points(int n) const {
  TransportScenario s = *this;
  s.grid.n = n;
  return s;
}

interp::InterpolationReport require_interpolation(const TransportScenario& s) {
  s.validate();
  const int nx = s.grid.dim == 1 ? 1 : 3;
  const auto lattice = interp::spacetime_lattice(s.t_start, s.t_end, 50, s.grid.half_width, nx);
  auto report = interp::verify_interpolation(*s.base, interp::TransitionFunction(s.t1, s.t2), lattice);
  if (!report.pass()) {
    throw InterpolationSignatureError("interpolated metric failed its window checks" +
                                      (report.error.empty() ? std::string() : ": " + report.error));
  }
  return report;
}

std::vector<kg::FieldState> transport_many(std::span<const shell::MassShellVector> basis, const TransportScenario& s) {
  require_interpolation(s);
  std::vector<kg::FieldState> start;
  start.reserve(basis.size());
  for (const auto& F : basis) start.push_back(shell::synthesize(F, s.grid, s.t_start));
  return kg::evolve_many(start, *s.interpolated(), s.m, s.grid, s.t_end);
}

kg::FieldState transport_forward(const shell::MassShellVector& F, const TransportScenario& s) {
  return transport_many(std::span<const shell::MassShellVector>(&F, 1), s).front();
}

double boundary_ratio(const kg::FieldState& state, const kg::GridSpec& grid) {
  const int band = std::max(2, grid.n / 20);
  double peak = 0.0;
  double edge = 0.0;
  for (std::size_t j = 0; j < state.phi.size(); ++j) {
    const double a = std::abs(state.phi[j]);
    peak = std::max(peak, a);
    std::size_t rest = j;
    bool near = false;
    for (int ax = 0; ax < grid.dim; ++ax) {
      const int i = static_cast<int>(rest % grid.n);
      rest /= grid.n;
      if (i < band || i >= grid.n - band) near = true;
    }
    if (near) edge = std::max(edge, a);
  }
  return peak > 0.0 ? edge / peak : 0.0;
}

namespace {

Eigen::MatrixXcd gram_of(std::span<const kg::FieldState> states, const kg::Coefficients& c, const kg::GridSpec& grid) {
  const auto k = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXcd g(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) g(i, j) = kg::kg_inner_product(states[i], states[j], c, grid);
  }
  return g;
}

struct BasisRun {
  std::vector<kg::FieldState> start;
  std::vector<kg::FieldState> end;
  GramResult gram;
};

BasisRun run_basis(const TransportScenario& s) {
  const auto basis = s.basis_vectors();
  if (basis.size() < 2) throw ConfigError("gram matrix needs at least 2 basis packets");
  require_interpolation(s);
  BasisRun run;
  for (const auto& F : basis) run.start.push_back(shell::synthesize(F, s.grid, s.t_start));
  run.end = kg::evolve_many(run.start, *s.interpolated(), s.m, s.grid, s.t_end);

  auto& r = run.gram;
  const auto flat = make_minkowski();
  r.before = gram_of(run.start, kg::build_coefficients(*flat, 0.0, s.grid, s.t_start), s.grid);
  r.after = gram_of(run.end, kg::build_coefficients(*s.base, 0.0, s.grid, s.t_end), s.grid);
  r.defect = (r.before - r.after).cwiseAbs().maxCoeff();
  for (const auto& st : run.start) r.boundary = std::max(r.boundary, boundary_ratio(st, s.grid));
  for (const auto& st : run.end) r.boundary = std::max(r.boundary, boundary_ratio(st, s.grid));
  return run;
}

}  // namespace

GramResult gram_matrix(const TransportScenario& s) { return run_basis(s).gram; }

double round_trip(const shell::MassShellVector& F, const TransportScenario& s) {
  const auto forward = transport_forward(F, s);
  const auto back = kg::evolve(forward, *s.interpolated(), s.m, s.grid, s.t_start);
  return kg::relative_l2_error(back, shell::synthesize(F, s.grid, s.t_start));
}

std::vector<RefinementRow> refinement_sweep(const TransportScenario& s, std::span<const int> levels) {
  std::vector<RefinementRow> rows;
  for (int n : levels) {
    const auto level = s.with_grid_points(n);
    RefinementRow row;
    row.n = n;
    row.h = level.grid.h();
    row.dt = level.grid.time_step();
    const auto run = run_basis(level);
    row.defect = run.gram.defect;
    row.boundary = run.gram.boundary;
    row.gram = run.gram;
    const auto back = kg::evolve_many(run.end, *level.interpolated(), level.m, level.grid, level.t_start);
    for (std::size_t i = 0; i < back.size(); ++i) {
      row.round_trip = std::max(row.round_trip, kg::relative_l2_error(back[i], run.start[i]));
    }
    rows.push_back(row);
  }
  return rows;
}

bool strictly_decreasing(std::span<const RefinementRow> rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].defect < rows[i - 1].defect)) return false;
  }
  return true;
}

}  // namespace regularframe::transport
