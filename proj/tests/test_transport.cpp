#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "regularframe/errors.hpp"
#include "regularframe/transport.hpp"

using namespace regularframe;
using namespace regularframe::transport;
using shell::Complex;
using std::numbers::pi;

namespace {

shell::PacketSpec gaussian(double center, double p0) {
  shell::PacketSpec s;
  s.gaussian = shell::GaussianProfile{Vec3(center, 0, 0), 1.0, Vec3(p0, 0, 0), 1.0};
  return s;
}

FrwParams frw_params() {
  FrwParams p;
  p.eps = 0.05;
  p.t0 = 2.0;
  return p;
}

TransportScenario scenario(MetricPtr base, int n, double L, int packets) {
  TransportScenario s;
  s.base = std::move(base);
  s.grid.n = n;
  s.grid.half_width = L;
  for (int i = 0; i < packets; ++i) {
    const double off = i - 0.5 * (packets - 1);
    s.basis.push_back(gaussian(off, 0.5 * off));
  }
  return s;
}

double scale_oracle(double t) {
  auto p = frw_params();
  return 1.0 + p.eps * std::tanh((t - p.t0) / p.tau);
}
double scale_rate_oracle(double t) {
  auto p = frw_params();
  double c = std::cosh((t - p.t0) / p.tau);
  return p.eps / (p.tau * c * c);
}

// window f and its derivative on [1, 3]
double s_fn(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double ds_fn(double u) { return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0; }
std::array<double, 2> window(double t) {
  const double t1 = 1.0, t2 = 3.0, u = (t - t1) / (t2 - t1);
  if (u <= 0.0) return {0.0, 0.0};
  if (u >= 1.0) return {1.0, 0.0};
  double a = s_fn(u), b = s_fn(1.0 - u), da = ds_fn(u), db = -ds_fn(1.0 - u);
  double f = a / (a + b);
  double df = (da * b - a * db) / ((a + b) * (a + b)) / (t2 - t1);
  return {f, df};
}

}  // namespace

TEST_CASE("scenario validation") {
  auto s = scenario(make_minkowski(), 64, 8.0, 2);
  CHECK_NOTHROW(s.validate());
  s.t1 = -1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = scenario(make_minkowski(), 64, 8.0, 2);
  s.t_end = 2.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = scenario(nullptr, 64, 8.0, 2);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = scenario(make_minkowski(), 64, 8.0, 1);
  CHECK_THROWS_AS(gram_matrix(s), ConfigError);
  auto rep = require_interpolation(scenario(make_frw(frw_params()), 64, 8.0, 2));
  CHECK(rep.pass());
}

TEST_CASE("flat transport is free evolution") {
  auto s = scenario(make_minkowski(), 256, 16.0, 1);
  auto F = s.basis_vectors()[0];
  auto out = transport_forward(F, s);
  CHECK(out.t == s.t_end);
  CHECK(kg::relative_l2_error(out, shell::synthesize(F, s.grid, s.t_end)) < 1e-6);

  auto zero = transport_forward(shell::MassShellVector::zero(s.m, F.lattice), s);
  for (auto v : zero.phi) CHECK(v == Complex(0.0));
}

TEST_CASE("single FRW mode follows the reduced mode equation") {
  auto s = scenario(make_frw(frw_params()), 64, 8.0, 0);
  s.grid.dt = 0.01;
  const int k = 3;
  const double q = pi * k / s.grid.half_width, h = s.grid.h();
  const double kappa2 = 4.0 / (h * h) * std::pow(std::sin(q * h / 2), 2);
  const double m = s.m, mu = std::sqrt(m * m + kappa2);
  shell::PacketSpec plane;
  plane.modes.push_back({Vec3(q, 0, 0), Complex(1.0, 0.0)});
  auto F = shell::make_packet(plane, s.grid, m);
  auto out = transport_forward(F, s);

  const double cell = pi / s.grid.half_width;
  const Complex a0 = std::pow(2 * pi, -0.5) / std::sqrt(2.0) * cell / mu;
  // state: Re phi, Im phi, Re pi, Im pi
  using State = std::array<double, 4>;
  State y{a0.real(), a0.imag(), (Complex(0, -mu) * a0).real(), (Complex(0, -mu) * a0).imag()};
  auto rhs = [&](const State& x, State& dx, double t) {
    auto [f, df] = window(t);
    double a = scale_oracle(t), da = scale_rate_oracle(t);
    double b = std::exp(f * std::log(a));
    double db = b * (df * std::log(a) + f * da / a);
    double w2 = kappa2 / (b * b) + m * m, damp = 3.0 * db / b;
    dx[0] = x[2];
    dx[1] = x[3];
    dx[2] = -w2 * x[0] - damp * x[2];
    dx[3] = -w2 * x[1] - damp * x[3];
  };
  namespace odeint = boost::numeric::odeint;
  odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-13, 1e-13), rhs, y,
                             s.t_start, s.t_end, 1e-3);
  const Complex phi_end(y[0], y[1]), pi_end(y[2], y[3]);
  for (std::size_t j = 0; j < out.phi.size(); j += 9) {
    const Complex e = std::polar(1.0, q * s.grid.coordinate(static_cast<int>(j)));
    CHECK(std::abs(out.phi[j] - phi_end * e) < 1e-6 * std::abs(a0));
    CHECK(std::abs(out.pi[j] - pi_end * e) < 1e-6 * std::abs(a0) * mu);
  }
}

TEST_CASE("transport is linear and has the flow property") {
  auto s = scenario(make_frw(frw_params()), 128, 16.0, 2);
  auto basis = s.basis_vectors();
  const Complex a(0.5, 1.5), b(-1.0, 0.25);
  auto combo = basis[0];
  for (std::size_t k = 0; k < combo.samples.size(); ++k) combo.samples[k] = a * basis[0].samples[k] + b * basis[1].samples[k];
  auto u0 = transport_forward(basis[0], s), u1 = transport_forward(basis[1], s), uc = transport_forward(combo, s);
  auto lin = u0;
  for (std::size_t j = 0; j < lin.phi.size(); ++j) {
    lin.phi[j] = a * u0.phi[j] + b * u1.phi[j];
    lin.pi[j] = a * u0.pi[j] + b * u1.pi[j];
  }
  CHECK(kg::relative_l2_error(uc, lin) < 1e-10);

  auto metric = s.interpolated();
  auto start = shell::synthesize(basis[0], s.grid, s.t_start);
  auto mid = kg::evolve(start, *metric, s.m, s.grid, 2.0);
  auto two_shot = kg::evolve(mid, *metric, s.m, s.grid, s.t_end);
  CHECK(kg::relative_l2_error(two_shot, u0) < 1e-10);
}

TEST_CASE("flat Gram matrix and round trip") {
  auto s = scenario(make_minkowski(), 128, 32.0, 3);
  s.grid.dt = 0.01;
  auto g = gram_matrix(s);
  CHECK(g.defect < 1e-8);
  CHECK(g.boundary < 1e-8);
  CHECK((g.before - g.before.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(round_trip(s.basis_vectors()[0], s) < 1e-8);
}

TEST_CASE("FRW isometry defect falls under refinement") {
  auto s = scenario(make_frw(frw_params()), 256, 32.0, 5);
  std::vector<int> levels{64, 128, 256};
  auto rows = refinement_sweep(s, levels);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].defect < 5e-3);
  CHECK(strictly_decreasing(rows));
  CHECK(rows[2].round_trip < 1e-5);
  CHECK(rows[2].boundary < 1e-8);
  // second order in h: each halving gains at least a factor 3
  CHECK(rows[0].defect / rows[1].defect > 3.0);
  CHECK(rows[1].defect / rows[2].defect > 3.0);

  s.orthonormal = true;
  auto g = gram_matrix(s);
  const auto I = Eigen::MatrixXcd::Identity(5, 5);
  CHECK((g.before - I).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((g.after - I).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("FRW round trip is time symmetric to fourth order") {
  auto s = scenario(make_frw(frw_params()), 256, 16.0, 1);
  auto F = s.basis_vectors()[0];
  double coarse = round_trip(F, s);
  CHECK(coarse < 1e-6);
  s.grid.dt = 0.5 * s.grid.time_step();
  double fine = round_trip(F, s);
  CHECK(coarse / fine >= 8.0);
}

TEST_CASE("boundary ratio") {
  kg::GridSpec g;
  g.n = 100;
  g.half_width = 1.0;
  auto st = kg::FieldState::zero(g);
  CHECK(boundary_ratio(st, g) == 0.0);
  st.phi[50] = 2.0;
  st.phi[1] = 1e-3;
  CHECK(boundary_ratio(st, g) == doctest::Approx(5e-4));
}
