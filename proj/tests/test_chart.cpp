#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "regularframe/chart.hpp"
#include "regularframe/errors.hpp"
#include "regularframe/lorentz.hpp"
#include "regularframe/rng.hpp"

using namespace regularframe;
using namespace regularframe::chart;

namespace {

MetricPtr small_frw() {
  FrwParams p;
  p.eps = 0.1;
  return make_frw(p);
}

double dist(const SpacetimePoint& a, const SpacetimePoint& b) { return (a.as_vector() - b.as_vector()).norm(); }

}  // namespace

TEST_CASE("exponential map: flat and zero velocity") {
  GeodesicConfig cfg;
  SpacetimePoint x{0.5, {1.0, -2.0, 0.25}};
  Vec4 v(0.3, -0.7, 1.1, 0.2);
  auto y = exponential_map(*make_minkowski(), x, v, cfg);
  CHECK(dist(y, SpacetimePoint::from_vector(x.as_vector() + v)) < 1e-14);
  for (const MetricPtr& g : {make_minkowski(), small_frw()}) {
    auto z = exponential_map(*g, x, Vec4::Zero(), cfg);
    CHECK(dist(z, x) == 0.0);
  }
}

TEST_CASE("exponential map converges at fourth order under step halving") {
  auto g = small_frw();
  SpacetimePoint x{0.0, {0.0, 0.0, 0.0}};
  Vec4 v(0.6, 0.8, -0.4, 0.2);
  for (auto mode : {ChristoffelMode::Analytic, ChristoffelMode::FiniteDifference}) {
    std::vector<SpacetimePoint> ends;
    for (double step : {0.2, 0.1, 0.05}) {
      GeodesicConfig cfg;
      cfg.step = step;
      cfg.christoffel = mode;
      ends.push_back(exponential_map(*g, x, v, cfg));
    }
    double e1 = dist(ends[0], ends[1]), e2 = dist(ends[1], ends[2]);
    REQUIRE(e2 > 0.0);
    CHECK(std::log2(e1 / e2) >= 3.5);
  }
}

TEST_CASE("geodesic config validation") {
  GeodesicConfig cfg;
  cfg.fd_step = 1e-7;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.fd_step = 1e-2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.fd_step = 1e-4;
  cfg.step = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("exponential map leaving the validity region") {
  FrwParams p;
  p.eps = 0.1;
  auto g = make_frw(p);
  auto bounded = std::const_pointer_cast<MetricField>(g);
  ValidityRegion vr;
  vr.t_min = -1.0;
  vr.t_max = 1.0;
  bounded->set_validity(vr);
  CHECK_THROWS_AS(exponential_map(*bounded, {0.0, {0, 0, 0}}, Vec4(3.0, 0, 0, 0), GeodesicConfig{}),
                  DomainExitError);
}

TEST_CASE("cube radius") {
  ChartConfig cfg;
  CHECK(find_cube_radius(*make_minkowski(), {0.0, {0, 0, 0}}, cfg) == cfg.r_cap);

  WeakFieldParams wp;
  wp.amplitude = 0.01;
  CHECK(find_cube_radius(*make_weakfield(wp), {0.0, {0.2, 0, 0}}, cfg) == cfg.r_cap);

  // lapse degenerates at t = 1; the time-axis geodesic reaches it after
  // proper time int_0^1 sqrt(1 - t^2) dt
  DiagPolyParams dp;
  dp.diag[0] = {{-1.0, 0, 0}, {1.0, 2, 0}};
  double tau = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [](double t) { return std::sqrt(1.0 - t * t); }, 0.0, 1.0, 15, 1e-12);
  CHECK(tau == doctest::Approx(std::numbers::pi / 4).epsilon(1e-10));
  ChartConfig coarse = cfg;
  coarse.lattice_per_axis = 5;
  double r = find_cube_radius(*make_diag_poly(dp), {0.0, {0, 0, 0}}, coarse);
  CHECK(std::abs(r - tau) < 2e-3);
  // once the geodesic near the degenerate slice is resolved, only the bisection tolerance remains
  ChartConfig fine = coarse;
  fine.geodesic.step = 0.01;
  r = find_cube_radius(*make_diag_poly(dp), {0.0, {0, 0, 0}}, fine);
  CHECK(r <= tau);
  CHECK(tau - r <= fine.bisection_tol);

  // already degenerate at the center
  CHECK_THROWS_AS(find_cube_radius(*make_diag_poly(dp), {1.5, {0, 0, 0}}, cfg), Error);
}

TEST_CASE("tan and atan rescaling") {
  const double r = 0.7;
  CHECK(tan_rescale(Vec4::Zero(), r) == Vec4::Zero());
  Vec4 z = tan_rescale(Vec4::Constant(r / 2), r);
  CHECK((z - Vec4::Ones()).cwiseAbs().maxCoeff() < 1e-15);
  CounterRng rng(3);
  for (int i = 0; i < 1000; ++i) {
    Vec4 y;
    for (int k = 0; k < 4; ++k) y(k) = 0.999 * r * (2.0 * rng.uniform() - 1.0);
    CHECK((atan_rescale(tan_rescale(y, r), r) - y).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(tan_rescale(Vec4(0, r, 0, 0), r), OutOfCubeError);
  CHECK_THROWS_AS(tan_rescale(Vec4(0, 0, 0, -1.5 * r), r), OutOfCubeError);
}

TEST_CASE("orthonormal frame") {
  Mat4 g = Vec4(-4, 9, 1, 1).asDiagonal();
  g(1, 2) = g(2, 1) = 0.3;
  Mat4 e = orthonormal_frame(g);
  CHECK((e.transpose() * g * e - minkowski_matrix()).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(e(0, 0) > 0.0);
}

TEST_CASE("Minkowski chart pulls back by the atan Jacobian") {
  ChartConfig cfg;
  auto chart = build_regular_chart(make_minkowski(), {0.0, {0, 0, 0}}, cfg);
  CHECK(chart.r == cfg.r_cap);
  CHECK((chart.normalized_origin_metric() - minkowski_matrix()).cwiseAbs().maxCoeff() < 1e-10);
  const double s = 2.0 * chart.r / std::numbers::pi;
  Mat4 g0 = chart.pulled_metric->evaluate({0.0, {0, 0, 0}});
  CHECK((g0 - Mat4(Vec4(-s * s, s * s, s * s, s * s).asDiagonal())).cwiseAbs().maxCoeff() < 1e-10);
  for (const auto& z : chart_sample(5, 2.0)) {
    Vec4 zv = z.as_vector();
    Vec4 c;
    for (int k = 0; k < 4; ++k) c(k) = s / (1.0 + zv(k) * zv(k));
    Vec4 oracle(-c(0) * c(0), c(1) * c(1), c(2) * c(2), c(3) * c(3));
    Mat4 g = chart.pulled_metric->evaluate(z);
    CHECK((g - Mat4(oracle.asDiagonal())).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("FRW chart is regular on the standard sample") {
  ChartConfig cfg;
  cfg.lattice_per_axis = 5;
  auto chart = build_regular_chart(small_frw(), {0.0, {0, 0, 0}}, cfg);
  CHECK(chart.r > 0.0);
  CHECK((chart.normalized_origin_metric() - minkowski_matrix()).cwiseAbs().maxCoeff() < 1e-10);
  auto sample = chart_sample(5, 2.0);
  CHECK(sample.size() == 625);
  auto rep = lorentz::check_regular(*chart.pulled_metric, sample);
  CHECK(rep.pass);
  SpacetimePoint q{0.1, {0.1, -0.05, 0.0}};
  auto y = chart.ambient_to_normal(q);
  REQUIRE(y.has_value());
  CHECK(dist(chart.normal_to_ambient(*y), q) < 1e-10);
  CHECK(chart.covers(q));
}

TEST_CASE("greedy cover of Minkowski boxes") {
  ChartConfig cfg;
  cfg.cover_lattice = 5;
  cfg.lattice_per_axis = 5;
  CoordinateBox unit;
  auto one = cover_region(make_minkowski(), unit, cfg);
  CHECK(one.charts.size() == 1);
  CHECK(one.coverage() == 1.0);

  CoordinateBox big{Vec4::Constant(-2.0), Vec4::Constant(2.0)};
  auto many = cover_region(make_minkowski(), big, cfg);
  CHECK(many.charts.size() >= 2);
  CHECK(many.coverage() == 1.0);
  // flat charts are axis cubes around their centers
  for (const auto& q : many.lattice) {
    bool inside = false;
    for (const auto& c : many.charts) {
      Vec4 d = c.frame.inverse() * (q.as_vector() - c.center.as_vector());
      inside = inside || d.cwiseAbs().maxCoeff() < c.r;
    }
    CHECK(inside);
  }

  cfg.max_charts = 1;
  CHECK_THROWS_AS(cover_region(make_minkowski(), big, cfg), CoverFailureError);
}

TEST_CASE("every chart of an FRW cover is regular") {
  ChartConfig cfg;
  cfg.r_cap = 0.5;
  cfg.cover_lattice = 3;
  cfg.lattice_per_axis = 3;
  CoordinateBox box{Vec4::Constant(-0.5), Vec4::Constant(0.5)};
  auto cover = cover_region(small_frw(), box, cfg);
  CHECK(cover.coverage() == 1.0);
  auto sample = chart_sample(5, 2.0);
  for (const auto& c : cover.charts) CHECK(lorentz::check_regular(*c.pulled_metric, sample).pass);
}
