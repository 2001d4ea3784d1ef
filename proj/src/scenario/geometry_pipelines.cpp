#include <cmath>
#include <numbers>

#include "pipelines.hpp"
#include "regularframe/chart.hpp"
#include "regularframe/interpolation.hpp"
#include "regularframe/lorentz.hpp"

namespace regularframe::scenario::detail {

using nlohmann::ordered_json;

namespace {

Vec4 vec4_from(const Reader& r, const std::string& key, const Vec4& def) {
  if (!r.has(key)) return def;
  const auto v = r.numbers(key, 4, 4);
  return {v[0], v[1], v[2], v[3]};
}

Mat4 expected_matrix(const Reader& probe) {
  const auto& e = probe.raw("expect");
  const std::string where = probe.path("expect");
  Mat4 m = Mat4::Zero();
  auto num = [&](const nlohmann::json& v, const std::string& w) {
    if (!v.is_number()) throw SchemaError(w + ": expected a number");
    return v.get<double>();
  };
  if (e.is_array() && e.size() == 4 && e[0].is_number()) {
    for (int i = 0; i < 4; ++i) m(i, i) = num(e[i], where + "[" + std::to_string(i) + "]");
  } else if (e.is_array() && e.size() == 4) {
    for (int i = 0; i < 4; ++i) {
      if (!e[i].is_array() || e[i].size() != 4) throw SchemaError(where + ": expected 4 diagonal entries or a 4x4 matrix");
      for (int j = 0; j < 4; ++j) m(i, j) = num(e[i][j], where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
  } else {
    throw SchemaError(where + ": expected 4 diagonal entries or a 4x4 matrix");
  }
  return m;
}

ordered_json mat_json(const Mat4& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < 4; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2), m(i, 3)});
  return rows;
}

}  // namespace

void run_interpolate(const Reader& r, Report& out) {
  r.allow({"kind", "name", "seed", "tolerances", "metric", "window", "lattice", "probes"});
  const Tolerances tol({{"post_window", 1e-12}, {"c1", 1e-4}, {"probe", 1e-12}}, r);
  const auto metric = metric_from(r, "metric", "minkowski");
  const auto w = r.child("window");
  w.allow({"t1", "t2"});
  const double t1 = w.number("t1");
  const double t2 = w.number("t2");
  if (!(t1 < t2)) throw SchemaError(w.path("t2") + ": window needs t1 < t2");
  const interp::TransitionFunction tf(t1, t2);

  int nt = 50, nx = 6;
  double half = 1.0, t_lo = t1 - 1.0, t_hi = t2 + 1.0;
  if (r.has("lattice")) {
    const auto l = r.child("lattice");
    l.allow({"nt", "nx", "half_width", "t_lo", "t_hi"});
    nt = l.integer("nt", nt);
    nx = l.integer("nx", nx);
    half = l.number("half_width", half);
    t_lo = l.number("t_lo", t_lo);
    t_hi = l.number("t_hi", t_hi);
    if (nt < 2 || nx < 1) throw SchemaError(l.path("nt") + ": lattice needs nt >= 2 and nx >= 1");
    if (!(t_lo < t_hi)) throw SchemaError(l.path("t_hi") + ": needs t_lo < t_hi");
  }
  const auto lattice = interp::spacetime_lattice(t_lo, t_hi, nt, half, nx);
  const auto rep = interp::verify_interpolation(*metric, tf, lattice);
  if (!rep.error.empty()) out.error = rep.error;
  out.check("pre_window_bitwise", rep.pre_window_exact ? 1.0 : 0.0, 1.0, Comparison::Equal);
  out.check("post_window_defect", rep.post_window_defect, tol["post_window"]);
  out.check("lorentzian_fraction",
            rep.sampled_points ? double(rep.lorentzian_points) / double(rep.sampled_points) : 0.0, 1.0,
            Comparison::AtLeast);
  out.check("c1_jump", rep.c1_jump, tol["c1"]);
  out.details["sampled_points"] = rep.sampled_points;
  out.details["lorentzian_points"] = rep.lorentzian_points;

  if (r.has("probes")) {
    const auto& probes = r.raw("probes");
    if (!probes.is_array()) throw SchemaError(r.path("probes") + ": expected an array");
    ordered_json got = ordered_json::array();
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const Reader p(probes[i], r.path("probes") + "[" + std::to_string(i) + "]");
      p.allow({"t", "x", "expect", "tol"});
      SpacetimePoint pt;
      pt.t = p.number("t");
      if (p.has("x")) {
        const auto x = p.numbers("x", 3, 3);
        for (int a = 0; a < 3; ++a) pt.x[a] = x[a];
      }
      const Mat4 expect = expected_matrix(p);
      try {
        const Mat4 g = interp::interpolated_metric_at(*metric, tf, pt);
        out.check("probe[" + std::to_string(i) + "]", (g - expect).cwiseAbs().maxCoeff(), p.number("tol", tol["probe"]));
        got.push_back({{"t", pt.t}, {"f", tf(pt.t)}, {"metric", mat_json(g)}});
      } catch (const Error& e) {
        out.check("probe[" + std::to_string(i) + "]", INFINITY, p.number("tol", tol["probe"]));
        out.error = e.what();
      }
    }
    out.details["probes"] = got;
  }

  Table profile{"profile", {"t", "f", "g00", "g11", "g22", "g33"}, {}};
  for (int i = 0; i < nt; ++i) {
    SpacetimePoint pt;
    pt.t = t_lo + (t_hi - t_lo) * i / (nt - 1);
    try {
      const Mat4 g = interp::interpolated_metric_at(*metric, tf, pt);
      profile.rows.push_back({pt.t, tf(pt.t), g(0, 0), g(1, 1), g(2, 2), g(3, 3)});
    } catch (const Error&) {
      profile.rows.push_back({pt.t, tf(pt.t), NAN, NAN, NAN, NAN});
    }
  }
  out.tables.push_back(std::move(profile));
}

void run_chart(const Reader& r, Report& out) {
  r.allow({"kind", "name", "seed", "tolerances", "metric", "center", "config", "lattice", "cover"});
  const Tolerances tol({{"law", 1e-10}, {"origin", 1e-8}}, r);
  const auto metric = metric_from(r, "metric", "minkowski");
  const Vec4 c = vec4_from(r, "center", Vec4::Zero());
  const SpacetimePoint center{c[0], {c[1], c[2], c[3]}};

  chart::ChartConfig cfg;
  if (r.has("config")) {
    const auto k = r.child("config");
    k.allow({"r_cap", "step", "lattice_per_axis", "bisection_tol", "cover_lattice", "max_charts"});
    cfg.r_cap = k.number("r_cap", cfg.r_cap);
    cfg.geodesic.step = k.number("step", cfg.geodesic.step);
    cfg.lattice_per_axis = k.integer("lattice_per_axis", cfg.lattice_per_axis);
    cfg.bisection_tol = k.number("bisection_tol", cfg.bisection_tol);
    cfg.cover_lattice = k.integer("cover_lattice", cfg.cover_lattice);
    cfg.max_charts = k.integer("max_charts", cfg.max_charts);
  }
  int n = 5;
  double extent = 2.0;
  if (r.has("lattice")) {
    const auto l = r.child("lattice");
    l.allow({"n", "extent"});
    n = l.integer("n", n);
    extent = l.number("extent", extent);
    if (n < 1 || !(extent > 0.0)) throw SchemaError(l.path("n") + ": lattice needs n >= 1 and extent > 0");
  }

  const auto ch = chart::build_regular_chart(metric, center, cfg);
  out.details["radius"] = ch.r;
  out.details["frame"] = mat_json(ch.frame);
  out.check("cube_radius", ch.r, 1e-6, Comparison::AtLeast);
  const Mat4 eta = minkowski_matrix();
  out.check("origin_metric", (ch.normalized_origin_metric() - eta).cwiseAbs().maxCoeff(), tol["origin"]);

  const bool law = metric->is_flat();
  const double s = 2.0 * ch.r / std::numbers::pi;
  double law_defect = 0.0;
  std::size_t lorentzian = 0;
  const auto nodes = chart::chart_sample(n, extent);
  Table series{"pulled_metric", {"z0", "z1", "z2", "z3", "g00", "g11", "g22", "g33"}, {}};
  for (const auto& z : nodes) {
    const Mat4 g = ch.pulled_metric->evaluate(z);
    if (lorentz::is_lorentzian(g)) ++lorentzian;
    const Vec4 zv = z.as_vector();
    if (law) {
      Mat4 expect = Mat4::Zero();
      for (int mu = 0; mu < 4; ++mu) {
        const double cm = s / (1.0 + zv[mu] * zv[mu]);
        expect(mu, mu) = eta(mu, mu) * cm * cm;
      }
      law_defect = std::max(law_defect, (g - expect).cwiseAbs().maxCoeff());
    }
    series.rows.push_back({zv[0], zv[1], zv[2], zv[3], g(0, 0), g(1, 1), g(2, 2), g(3, 3)});
  }
  if (law) out.check("pulled_metric_law", law_defect, tol["law"]);
  out.check("pulled_lorentzian_fraction", nodes.empty() ? 1.0 : double(lorentzian) / double(nodes.size()), 1.0,
            Comparison::AtLeast);
  out.tables.push_back(std::move(series));

  if (r.has("cover")) {
    const auto cv = r.child("cover");
    cv.allow({"lo", "hi", "lattice"});
    chart::CoordinateBox box;
    box.lo = vec4_from(cv, "lo", box.lo);
    box.hi = vec4_from(cv, "hi", box.hi);
    for (int a = 0; a < 4; ++a) {
      if (!(box.lo[a] <= box.hi[a])) throw SchemaError(cv.path("hi") + ": needs lo <= hi");
    }
    cfg.cover_lattice = cv.integer("lattice", cfg.cover_lattice);
    const auto cover = chart::cover_region(metric, box, cfg);
    out.check("cover_coverage", cover.coverage(), 1.0, Comparison::AtLeast);
    ordered_json charts = ordered_json::array();
    for (const auto& k : cover.charts) {
      charts.push_back({{"center", {k.center.t, k.center.x[0], k.center.x[1], k.center.x[2]}}, {"r", k.r}});
    }
    out.details["cover"] = {{"charts", cover.charts.size()},
                            {"lattice_points", cover.lattice.size()},
                            {"covered_points", cover.covered_points},
                            {"chart_list", charts}};
  }
}

}  // namespace regularframe::scenario::detail
