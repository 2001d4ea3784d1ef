#include <doctest.h>

#include <cmath>

#include "regularframe/errors.hpp"
#include "regularframe/interpolation.hpp"
#include "regularframe/lorentz.hpp"
#include "regularframe/rng.hpp"

using namespace regularframe;
using namespace regularframe::interp;

namespace {

Mat4 diag4(double a, double b, double c, double d) { return Vec4(a, b, c, d).asDiagonal(); }

double bump(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double step_oracle(double t, double t1, double t2) {
  double u = (t - t1) / (t2 - t1);
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return bump(u) / (bump(u) + bump(1.0 - u));
}

// k-th one-sided difference, direction +1 (forward) or -1 (backward)
double one_sided(const TransitionFunction& f, double t, double h, int k, int dir) {
  double acc = 0.0, binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    double sign = ((k - j) % 2) ? -1.0 : 1.0;
    acc += sign * binom * f(t + dir * j * h);
    binom = binom * (k - j) / (j + 1);
  }
  return dir > 0 ? acc / std::pow(h, k) : (k % 2 ? -acc : acc) / std::pow(h, k);
}

FrwParams frw01() {
  FrwParams p;
  p.eps = 0.1;
  p.t0 = 2.0;
  return p;
}

}  // namespace

TEST_CASE("transition function values") {
  TransitionFunction f(1.0, 3.0);
  CHECK(f(1.0) == 0.0);
  CHECK(f(3.0) == 1.0);
  CHECK(f(-5.0) == 0.0);
  CHECK(f(7.0) == 1.0);
  CHECK(f(2.0) == doctest::Approx(0.5).epsilon(1e-15));
  double prev = 0.0;
  for (int i = 0; i <= 400; ++i) {
    double t = 0.5 + i * 0.01;
    double v = f(t);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v >= prev);
    CHECK(std::abs(v - step_oracle(t, 1.0, 3.0)) < 1e-15);
    prev = v;
  }
  CHECK_THROWS_AS(TransitionFunction(2.0, 2.0), ConfigError);
  CHECK_THROWS_AS(TransitionFunction(3.0, 1.0), ConfigError);
}

TEST_CASE("transition function is flat to fourth order at the window ends") {
  TransitionFunction f(1.0, 3.0);
  const double h = 1e-2;
  for (int k = 1; k <= 4; ++k) {
    // into the window from t1 and t2, and out of it
    CHECK(std::abs(one_sided(f, 1.0, h, k, +1)) < 1e-6);
    CHECK(std::abs(one_sided(f, 3.0, h, k, -1)) < 1e-6);
    CHECK(std::abs(one_sided(f, 1.0, h, k, -1)) == 0.0);
    CHECK(std::abs(one_sided(f, 3.0, h, k, +1)) == 0.0);
  }
}

TEST_CASE("deform_frame examples") {
  CHECK((deform_frame(Vec4(-0.25, 0, 0, 0), 1.0) - Vec4(-0.25, 0, 0, 0)).norm() < 1e-16);
  CHECK(deform_frame(Vec4(-3.0, 1.0, 2.0, -1.0), 0.0) == Vec4(-1, 0, 0, 0));
  CHECK(deform_frame(Vec4(2.0, 1.0, 0.0, 0.0), 0.0) == Vec4(1, 0, 0, 0));
  CHECK((deform_frame(Vec4(-4, 2, 0, 0), 0.5) - Vec4(-2, 1, 0, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(deform_frame(Vec4(0, 1, 0, 0), 0.5), DegenerateFrameError);
}

TEST_CASE("interpolated metric examples") {
  auto base = make_constant_diagonal(-4, 9, 1, 1);
  TransitionFunction tf(1.0, 3.0);
  Mat4 mid = interpolated_metric_at(*base, tf, {2.0, {0, 0, 0}});
  CHECK((mid - diag4(-2, 3, 1, 1)).cwiseAbs().maxCoeff() < 1e-14);

  auto frw = make_frw(frw01());
  CounterRng rng(5);
  for (int i = 0; i < 50; ++i) {
    SpacetimePoint before{1.0 - 3.0 * rng.uniform(), {rng.normal(), rng.normal(), rng.normal()}};
    SpacetimePoint after{3.0 + 3.0 * rng.uniform(), {rng.normal(), rng.normal(), rng.normal()}};
    for (const MetricPtr& g : {base, frw}) {
      CHECK(interpolated_metric_at(*g, tf, before) == diag4(-1, 1, 1, 1));
      CHECK((interpolated_metric_at(*g, tf, after) - g->evaluate(after)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SpacetimePoint inside{1.0 + 2.0 * rng.uniform(), {rng.normal(), 0, 0}};
    Mat4 gm = interpolated_metric_at(*make_minkowski(), tf, inside);
    CHECK((gm - diag4(-1, 1, 1, 1)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(lorentz::is_lorentzian(interpolated_metric_at(*frw, tf, inside)));
  }
}

TEST_CASE("diagonal entries blend monotonically for constant diagonal bases") {
  TransitionFunction tf(1.0, 3.0);
  for (auto d : {Vec4(-4, 9, 1, 1), Vec4(-0.5, 0.25, 2, 7)}) {
    auto base = make_constant_diagonal(d(0), d(1), d(2), d(3));
    Mat4 prev = diag4(-1, 1, 1, 1);
    for (int i = 0; i <= 200; ++i) {
      Mat4 g = interpolated_metric_at(*base, tf, {0.5 + i * 0.015, {0, 0, 0}});
      for (int mu = 0; mu < 4; ++mu) {
        double target = d(mu), start = mu == 0 ? -1.0 : 1.0;
        double dir = target >= start ? 1.0 : -1.0;
        CHECK(dir * (g(mu, mu) - prev(mu, mu)) >= -1e-15);
      }
      prev = g;
    }
    CHECK((prev - Mat4(d.asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("verify_interpolation passes on the reference bases") {
  TransitionFunction tf(1.0, 3.0);
  auto lattice = spacetime_lattice(0.0, 4.0, 50, 1.0, 3);
  CHECK(lattice.size() == 50 * 27);
  for (const MetricPtr& g : {make_minkowski(), make_constant_diagonal(-4, 9, 1, 1), make_frw(frw01())}) {
    auto rep = verify_interpolation(*g, tf, lattice);
    CHECK(rep.pass());
    CHECK(rep.pre_window_exact);
    CHECK(rep.post_window_defect < 1e-12);
    CHECK(rep.lorentzian_points == rep.sampled_points);
    CHECK(rep.c1_jump < 1e-4);
  }
}

TEST_CASE("interpolated metric field matches the pointwise map") {
  auto base = make_frw(frw01());
  InterpolatedMetric im(base, TransitionFunction(1.0, 3.0));
  SpacetimePoint p{1.7, {0.3, 0, 0}};
  CHECK(im.evaluate(p) == interpolated_metric_at(*base, im.transition(), p));
  CHECK(im.family() == "interpolated");
}
