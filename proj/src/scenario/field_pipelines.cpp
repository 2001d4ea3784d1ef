#include <algorithm>
#include <cmath>
#include <numbers>

#include "pipelines.hpp"
#include "regularframe/mass_shell.hpp"
#include "regularframe/rng.hpp"
#include "regularframe/transport.hpp"

namespace regularframe::scenario::detail {

using nlohmann::ordered_json;

namespace {

std::vector<int> levels_from(const Reader& r) {
  if (!r.has("refine")) return {};
  auto levels = r.integers("refine");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 16) throw SchemaError(r.path("refine") + "[" + std::to_string(i) + "]: levels need n >= 16");
    if (i && levels[i] <= levels[i - 1]) throw SchemaError(r.path("refine") + ": levels must increase");
  }
  return levels;
}

double mass_from(const Reader& r, double def) {
  const double m = r.number("m", def);
  if (!(m >= 0.0)) throw SchemaError(r.path("m") + ": mass must be >= 0");
  return m;
}

// Every second point of a grid with twice the resolution.
kg::FieldState restrict_half(const kg::FieldState& fine, const kg::GridSpec& coarse) {
  auto out = kg::FieldState::zero(coarse, fine.t);
  const std::size_t nf = 2 * static_cast<std::size_t>(coarse.n);
  for (std::size_t j = 0; j < out.phi.size(); ++j) {
    std::size_t rest = j, fj = 0, stride = 1;
    for (int a = 0; a < coarse.dim; ++a) {
      fj += 2 * (rest % coarse.n) * stride;
      rest /= coarse.n;
      stride *= nf;
    }
    out.phi[j] = fine.phi[fj];
    out.pi[j] = fine.pi[fj];
  }
  return out;
}

ordered_json complex_matrix(const Eigen::MatrixXcd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

std::vector<shell::PacketSpec> basis_from(const Reader& r) {
  const auto& b = r.raw("basis");
  const std::string where = r.path("basis");
  std::vector<shell::PacketSpec> out;
  if (b.is_array()) {
    for (std::size_t i = 0; i < b.size(); ++i) out.push_back(shell::packet_from_json(b[i], where + "[" + std::to_string(i) + "]"));
    return out;
  }
  // {"k", "width", "spacing", "p_step"}: centers and mean momenta spread symmetrically about 0.
  const Reader f(b, where);
  f.allow({"k", "width", "spacing", "p_step"});
  const int k = f.integer("k");
  if (k < 1) throw SchemaError(f.path("k") + ": needs k >= 1");
  const double width = f.number("width", 1.0);
  if (!(width > 0.0)) throw SchemaError(f.path("width") + ": must be positive");
  const double spacing = f.number("spacing", 1.0);
  const double p_step = f.number("p_step", 0.5);
  for (int i = 0; i < k; ++i) {
    const double off = i - 0.5 * (k - 1);
    shell::GaussianProfile g;
    g.width = width;
    g.center = Vec3(off * spacing, 0.0, 0.0);
    g.p0 = Vec3(off * p_step, 0.0, 0.0);
    out.push_back({{}, g});
  }
  return out;
}

}  // namespace

void run_evolve(const Reader& r, Report& out) {
  r.allow({"kind", "name", "seed", "tolerances", "metric", "grid", "m", "packet", "t0", "t_end", "samples", "refine"});
  const Tolerances tol({{"drift", 1e-6}, {"order", 1.8}}, r);
  const auto metric = metric_from(r, "metric", "minkowski");
  const auto grid = grid_from(r);
  const double m = mass_from(r, 1.0);
  const auto packet = shell::packet_from_json(r.raw("packet"), r.path("packet"));
  const double t0 = r.number("t0", 0.0);
  const double t_end = r.number("t_end");
  const int samples = r.integer("samples", 10);
  if (samples < 1) throw SchemaError(r.path("samples") + ": needs samples >= 1");
  const auto levels = levels_from(r);

  const auto F = shell::make_packet(packet, grid, m);
  auto state = shell::synthesize_continuum(F, grid, t0);
  const double n0 = kg::kg_inner_product(state, state, *metric, grid).real();
  Table drift{"drift", {"t", "norm", "relative_drift"}, {{t0, n0, 0.0}}};
  double worst = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double t = t0 + (t_end - t0) * i / samples;
    state = kg::evolve(state, *metric, m, grid, t);
    const double nt = kg::kg_inner_product(state, state, *metric, grid).real();
    const double d = n0 != 0.0 ? std::abs(nt - n0) / std::abs(n0) : 0.0;
    worst = std::max(worst, d);
    drift.rows.push_back({t, nt, d});
  }
  out.check("norm_drift", worst, tol["drift"]);
  out.tables.push_back(std::move(drift));
  out.details["initial_norm"] = n0;

  if (levels.size() >= 2) {
    // Minkowski has the exact continuum solution as reference; otherwise
    // successive levels are compared (self-convergence).
    const bool exact = metric->family() == "minkowski";
    Table conv{"convergence", {"n", "h", "dt", "error", "order"}, {}};
    std::vector<kg::FieldState> finals;
    std::vector<kg::GridSpec> grids;
    for (int n : levels) {
      auto g = grid;
      g.n = n;
      const auto Fn = shell::make_packet(packet, g, m);
      finals.push_back(kg::evolve(shell::synthesize_continuum(Fn, g, t0), *metric, m, g, t_end));
      grids.push_back(g);
      if (exact) {
        const double e = kg::relative_l2_error(finals.back(), shell::synthesize_continuum(Fn, g, t_end));
        conv.rows.push_back({double(n), g.h(), g.time_step(), e, NAN});
      }
    }
    if (!exact) {
      for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        if (levels[i + 1] != 2 * levels[i]) throw SchemaError(r.path("refine") + ": self-convergence needs doubling levels");
        const double e = kg::relative_l2_error(restrict_half(finals[i + 1], grids[i]), finals[i]);
        conv.rows.push_back({double(levels[i]), grids[i].h(), grids[i].time_step(), e, NAN});
      }
    }
    double order = INFINITY;
    for (std::size_t i = 1; i < conv.rows.size(); ++i) {
      const double o = std::log(conv.rows[i - 1][3] / conv.rows[i][3]) / std::log(conv.rows[i - 1][1] / conv.rows[i][1]);
      conv.rows[i][4] = o;
      order = std::min(order, o);
    }
    if (conv.rows.size() >= 2) out.check("observed_order", order, tol["order"], Comparison::AtLeast);
    out.details["reference"] = exact ? "continuum" : "self";
    out.tables.push_back(std::move(conv));
  }
}

void run_transport(const Reader& r, Report& out) {
  r.allow({"kind", "name", "seed", "tolerances", "metric", "window", "grid", "m", "basis", "t_start", "t_end", "refine",
           "orthonormal"});
  const Tolerances tol({{"gram", 5e-3}, {"round_trip", 1e-5}, {"boundary", 1e-8}}, r);
  transport::TransportScenario s;
  s.base = metric_from(r, "metric", std::nullopt);
  const auto w = r.child("window");
  w.allow({"t1", "t2"});
  s.t1 = w.number("t1");
  s.t2 = w.number("t2");
  s.grid = grid_from(r);
  s.m = mass_from(r, 1.0);
  s.basis = basis_from(r);
  if (s.basis.size() < 2) throw SchemaError(r.path("basis") + ": needs at least 2 packets");
  s.t_start = r.number("t_start", s.t1 - 1.0);
  s.t_end = r.number("t_end", s.t2 + 1.0);
  s.orthonormal = r.boolean("orthonormal", false);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw SchemaError(r.path("window") + ": " + e.what());
  }
  auto levels = levels_from(r);
  if (std::find(levels.begin(), levels.end(), s.grid.n) == levels.end()) {
    if (levels.empty()) levels.push_back(s.grid.n);
  }
  const auto rows = transport::refinement_sweep(s, levels);
  const auto primary_it = std::find_if(rows.begin(), rows.end(), [&](const auto& row) { return row.n == s.grid.n; });
  const auto primary = primary_it != rows.end() ? *primary_it : transport::refinement_sweep(s, std::vector<int>{s.grid.n}).front();

  out.check("gram_defect", primary.defect, tol["gram"]);
  out.check("round_trip", primary.round_trip, tol["round_trip"]);
  out.check("boundary_ratio", primary.boundary, tol["boundary"]);
  if (rows.size() >= 2) {
    out.check("defect_strictly_decreasing", transport::strictly_decreasing(rows) ? 1.0 : 0.0, 1.0, Comparison::Equal);
  }
  Table conv{"convergence", {"n", "h", "dt", "gram_defect", "round_trip", "boundary"}, {}};
  for (const auto& row : rows) conv.rows.push_back({double(row.n), row.h, row.dt, row.defect, row.round_trip, row.boundary});
  out.tables.push_back(std::move(conv));
  out.details["grid_points"] = primary.n;
  out.details["gram_before"] = complex_matrix(primary.gram.before);
  out.details["gram_after"] = complex_matrix(primary.gram.after);
}

void run_shell(const Reader& r, Report& out) {
  r.allow({"kind", "name", "seed", "tolerances", "ball", "box", "chain"});
  const Tolerances tol({{"ball", 1e-6}, {"box", 1e-4}, {"j", 1e-10}, {"k", 1e-8}, {"calibration", 1e-14}}, r);
  auto list = [&](const std::string& key) {
    const auto& v = r.raw(key);
    if (!v.is_array()) throw SchemaError(r.path(key) + ": expected an array");
    return v;
  };
  if (r.has("ball")) {
    const auto balls = list("ball");
    Table t{"ball", {"radius", "m", "measure", "expected"}, {}};
    for (std::size_t i = 0; i < balls.size(); ++i) {
      const Reader b(balls[i], r.path("ball") + "[" + std::to_string(i) + "]");
      b.allow({"radius", "m", "expect"});
      const double R = b.number("radius");
      const double m = mass_from(b, 0.0);
      // 4 pi int_0^R r^2 / sqrt(m^2 + r^2) dr in closed form.
      const double root = std::sqrt(R * R + m * m);
      const double closed = m > 0.0 ? 2.0 * std::numbers::pi * (R * root - m * m * std::asinh(R / m))
                                     : 2.0 * std::numbers::pi * R * R;
      const double expect = b.number("expect", closed);
      const double v = shell::shell_measure_ball(R, m);
      out.check("ball[" + std::to_string(i) + "]", std::abs(v - expect), tol["ball"]);
      t.rows.push_back({R, m, v, expect});
    }
    out.tables.push_back(std::move(t));
  }
  if (r.has("box")) {
    const auto boxes = list("box");
    Table t{"box", {"m", "measure", "scaled", "volume"}, {}};
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const Reader b(boxes[i], r.path("box") + "[" + std::to_string(i) + "]");
      b.allow({"lo", "hi", "m", "expect"});
      const auto lo = b.numbers("lo", 3, 3);
      const auto hi = b.numbers("hi", 3, 3);
      const double m = mass_from(b, 1.0);
      const Vec3 l(lo[0], lo[1], lo[2]), h(hi[0], hi[1], hi[2]);
      const double v = shell::shell_measure_box(l, h, m);
      const double volume = (h - l).prod();
      if (b.has("expect")) {
        out.check("box[" + std::to_string(i) + "]", std::abs(v - b.number("expect")), tol["box"]);
      } else {
        // large-m limit: mu_m(box) ~ volume / m
        out.check("box[" + std::to_string(i) + "].asymptotic", std::abs(v * m - volume) / volume, tol["box"]);
      }
      t.rows.push_back({m, v, v * m, volume});
    }
    out.tables.push_back(std::move(t));
  }
  if (r.has("chain")) {
    const auto c = r.child("chain");
    c.allow({"masses", "vectors", "grid"});
    std::vector<double> masses = c.has("masses") ? c.numbers("masses", 1, 64) : std::vector<double>{0.5, 1.0, 2.0};
    const int vectors = c.integer("vectors", 20);
    kg::GridSpec def;
    def.n = 32;
    def.half_width = 8.0;
    const auto grid = grid_from(c, def);
    const auto lattice = shell::grid_lattice(grid);
    const double c_closed = shell::synthesis_constant(grid.dim);
    const double c_cal = 1.0 / std::sqrt(2.0 * lattice->cell * grid.box_volume());
    out.check("calibration", std::abs(c_closed - c_cal) / c_cal, tol["calibration"]);
    const auto flat = make_minkowski();
    const auto coeffs = kg::build_coefficients(*flat, 0.0, grid, 0.0);
    Table t{"chain", {"m", "vector", "norm_f", "norm_J", "norm_KJ"}, {}};
    double worst_j = 0.0, worst_k = 0.0;
    for (std::size_t mi = 0; mi < masses.size(); ++mi) {
      const double m = masses[mi];
      if (!(m >= 0.0)) throw SchemaError(c.path("masses") + ": masses must be >= 0");
      CounterRng rng(out.seed, mi);
      for (int v = 0; v < vectors; ++v) {
        shell::LatticeFunction f{lattice, std::vector<shell::Complex>(lattice->size())};
        for (std::size_t k = 0; k < f.values.size(); ++k) {
          f.values[k] = rng.complex_normal();
          if (m == 0.0 && lattice->momenta[k].squaredNorm() == 0.0) f.values[k] = 0.0;
        }
        const double nf = f.norm();
        const auto J = shell::j_transform(f, m);
        const double nj = J.norm();
        const auto K = shell::synthesize(J, grid, 0.0);
        const double nk = std::sqrt(kg::kg_inner_product(K, K, coeffs, grid).real());
        worst_j = std::max(worst_j, std::abs(nj - nf) / nf);
        worst_k = std::max(worst_k, std::abs(nk - nj) / nj);
        t.rows.push_back({m, double(v), nf, nj, nk});
      }
    }
    out.check("chain_j", worst_j, tol["j"]);
    out.check("chain_k", worst_k, tol["k"]);
    out.tables.push_back(std::move(t));
  }
}

}  // namespace regularframe::scenario::detail
