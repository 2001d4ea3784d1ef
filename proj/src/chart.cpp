#include "regularframe/chart.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "regularframe/errors.hpp"

namespace regularframe::chart {

void GeodesicConfig::validate() const {
  if (!(step > 0.0)) throw ConfigError("geodesic step must be positive");
  if (max_steps < 1 || step * max_steps < 1.0) throw ConfigError("step * max_steps must cover unit affine parameter");
  if (!(fd_step >= 1e-6 && fd_step <= 1e-3)) {
    throw ConfigError("finite-difference step must lie in [1e-6, 1e-3]");
  }
}

Christoffel christoffel(const MetricField& field, const SpacetimePoint& p, const GeodesicConfig& cfg) {
  const Mat4 ginv = field.evaluate(p).inverse();
  const bool analytic = cfg.christoffel == ChristoffelMode::Analytic && field.has_analytic_derivative();
  std::array<Mat4, 4> dg;
  if (analytic) {
    dg = field.derivative(p);
  } else {
    // central differences even when the family knows its derivative
    const Vec4 base = p.as_vector();
    for (int mu = 0; mu < 4; ++mu) {
      Vec4 hi = base, lo = base;
      hi[mu] += cfg.fd_step;
      lo[mu] -= cfg.fd_step;
      dg[mu] = (field.evaluate(SpacetimePoint::from_vector(hi)) - field.evaluate(SpacetimePoint::from_vector(lo))) /
               (2.0 * cfg.fd_step);
    }
  }
  // lowered[nu](a, b) = 1/2 (d_a g_{nu b} + d_b g_{nu a} - d_nu g_{ab})
  std::array<Mat4, 4> lowered;
  for (int nu = 0; nu < 4; ++nu) {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        lowered[nu](a, b) = 0.5 * (dg[a](nu, b) + dg[b](nu, a) - dg[nu](a, b));
      }
    }
  }
  Christoffel gamma;
  for (int mu = 0; mu < 4; ++mu) {
    gamma[mu].setZero();
    for (int nu = 0; nu < 4; ++nu) gamma[mu] += ginv(mu, nu) * lowered[nu];
  }
  return gamma;
}

namespace {

struct GeodesicState {
  Vec4 x;
  Vec4 v;
};

GeodesicState geodesic_rhs(const MetricField& field, const GeodesicState& s, const GeodesicConfig& cfg) {
  const auto point = SpacetimePoint::from_vector(s.x);
  if (!point.finite() || !s.v.allFinite()) throw BlowupError("geodesic state became non-finite");
  if (!field.validity().contains(point)) throw DomainExitError("geodesic left the validity region");
  // The signature can only change where det g crosses zero; a discrete path may
  // otherwise step over a degenerate slice and bounce back.
  if (!(field.evaluate(point).determinant() < 0.0)) throw DomainExitError("geodesic left the Lorentzian region");
  const auto gamma = christoffel(field, point, cfg);
  Vec4 acc;
  for (int mu = 0; mu < 4; ++mu) acc[mu] = -s.v.dot(gamma[mu] * s.v);
  return {s.v, acc};
}

}  // namespace

SpacetimePoint exponential_map(const MetricField& field, const SpacetimePoint& x, const Vec4& v,
                               const GeodesicConfig& cfg) {
  cfg.validate();
  if (!field.validity().contains(x)) throw DomainExitError("geodesic starts outside the validity region");
  if (field.is_flat()) {
    const auto end = SpacetimePoint::from_vector(x.as_vector() + v);
    if (!field.validity().contains(end)) throw DomainExitError("geodesic left the validity region");
    return end;
  }
  if (v.isZero(0.0)) return x;
  const int steps = static_cast<int>(std::ceil(1.0 / cfg.step - 1e-12));
  const double h = 1.0 / steps;
  GeodesicState s{x.as_vector(), v};
  for (int i = 0; i < steps; ++i) {
    const auto k1 = geodesic_rhs(field, s, cfg);
    const auto k2 = geodesic_rhs(field, {s.x + 0.5 * h * k1.x, s.v + 0.5 * h * k1.v}, cfg);
    const auto k3 = geodesic_rhs(field, {s.x + 0.5 * h * k2.x, s.v + 0.5 * h * k2.v}, cfg);
    const auto k4 = geodesic_rhs(field, {s.x + h * k3.x, s.v + h * k3.v}, cfg);
    s.x += (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.v += (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  }
  const auto end = SpacetimePoint::from_vector(s.x);
  if (!end.finite() || !s.v.allFinite()) throw BlowupError("geodesic state became non-finite");
  if (!field.validity().contains(end)) throw DomainExitError("geodesic left the validity region");
  return end;
}

Mat4 orthonormal_frame(const Mat4& g) {
  const auto block = lorentz::block_decompose(g);
  Vec4 n = lorentz::normal_vector(g);
  if (n[0] < 0.0) n = -n;
  Mat4 frame = Mat4::Zero();
  frame.col(0) = n / std::sqrt(-block.lapse2);
  // G = L L^T; spatial frame vectors are the columns of L^{-T}.
  const Eigen::LLT<Mat3> llt(block.spatial);
  const Mat3 spatial = llt.matrixU().solve(Mat3::Identity());
  frame.block<3, 3>(1, 1) = spatial;
  return frame;
}

namespace {

constexpr double kJacobianStep = 1e-4;

/// Normal coordinates at x: y -> exp_x(frame y).
struct NormalMap {
  const MetricField& field;
  SpacetimePoint x;
  Mat4 frame;
  GeodesicConfig cfg;

  SpacetimePoint operator()(const Vec4& y) const { return exponential_map(field, x, frame * y, cfg); }

  /// d exp_x(frame y) / dy, fourth-order central differences.
  Mat4 jacobian(const Vec4& y) const {
    if (field.is_flat()) return frame;
    Mat4 j;
    for (int a = 0; a < 4; ++a) {
      Vec4 e = Vec4::Zero();
      e[a] = kJacobianStep;
      const Vec4 p2 = (*this)(y + 2.0 * e).as_vector();
      const Vec4 p1 = (*this)(y + e).as_vector();
      const Vec4 m1 = (*this)(y - e).as_vector();
      const Vec4 m2 = (*this)(y - 2.0 * e).as_vector();
      j.col(a) = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * kJacobianStep);
    }
    return j;
  }

  /// Metric components in normal coordinates at y.
  Mat4 metric(const Vec4& y) const {
    const Mat4 j = jacobian(y);
    const Mat4 g = field.evaluate((*this)(y));
    const Mat4 out = j.transpose() * g * j;
    return 0.5 * (out + out.transpose());
  }
};

bool cube_point_ok(const NormalMap& map, const Vec4& y) {
  try {
    const Mat4 gy = map.metric(y);
    const Vec4 n = lorentz::normal_vector(gy);
    const auto basis = lorentz::FrameBasis::with_time_vector(n);
    return basis.independent(1e-8) && n.dot(gy * n) < 0.0;
  } catch (const Error&) {
    return false;
  }
}

bool cube_ok(const NormalMap& map, double r, int per_axis) {
  // Node lattice pulled just inside the open cube.
  const double extent = r * (1.0 - 1e-6);
  std::vector<double> c(per_axis);
  for (int i = 0; i < per_axis; ++i) c[i] = per_axis == 1 ? 0.0 : -extent + 2.0 * extent * i / (per_axis - 1);
  for (double a : c)
    for (double b : c)
      for (double d : c)
        for (double e : c)
          if (!cube_point_ok(map, Vec4(a, b, d, e))) return false;
  return true;
}

class ChartMetric final : public MetricField {
 public:
  ChartMetric(MetricPtr ambient, NormalMap map, double r) : ambient_(std::move(ambient)), map_(map), r_(r) {}

  std::string family() const override { return "chart"; }
  nlohmann::ordered_json to_json() const override {
    return {{"family", "chart"}, {"ambient", ambient_->to_json()}, {"r", r_}};
  }

 protected:
  Mat4 raw(const SpacetimePoint& p) const override {
    const Vec4 z = p.as_vector();
    const Vec4 y = atan_rescale(z, r_);
    Vec4 dydz;
    for (int mu = 0; mu < 4; ++mu) dydz[mu] = (2.0 * r_ / std::numbers::pi) / (1.0 + z[mu] * z[mu]);
    const Mat4 gy = map_.metric(y);
    return dydz.asDiagonal() * gy * dydz.asDiagonal();
  }

 private:
  MetricPtr ambient_;  // keeps map_.field alive
  NormalMap map_;
  double r_;
};

}  // namespace

double find_cube_radius(const MetricField& field, const SpacetimePoint& x, const ChartConfig& cfg) {
  if (!(cfg.r_cap > 0.0) || !(cfg.bisection_tol > 0.0) || cfg.lattice_per_axis < 1) {
    throw ConfigError("invalid cube search configuration");
  }
  const Mat4 gx = field.evaluate(x);
  if (!lorentz::is_lorentzian(gx)) throw SignatureError("metric is not Lorentzian at the chart center");
  const NormalMap map{field, x, orthonormal_frame(gx), cfg.geodesic};

  if (cube_ok(map, cfg.r_cap, cfg.lattice_per_axis)) return cfg.r_cap;
  double lo = 0.0;
  double hi = cfg.r_cap;
  while (hi - lo > cfg.bisection_tol) {
    const double mid = 0.5 * (lo + hi);
    if (cube_ok(map, mid, cfg.lattice_per_axis)) lo = mid;
    else hi = mid;
  }
  if (lo == 0.0) {
    if (!cube_ok(map, cfg.bisection_tol, cfg.lattice_per_axis)) {
      throw NoRegularNeighborhoodError("no cube passes at the minimum resolution");
    }
    lo = cfg.bisection_tol;
  }
  return lo;
}

Vec4 tan_rescale(const Vec4& y, double r) {
  Vec4 z;
  for (int mu = 0; mu < 4; ++mu) {
    if (!(std::abs(y[mu]) < r)) throw OutOfCubeError("component " + std::to_string(mu) + " outside the open cube");
    z[mu] = std::tan(std::numbers::pi * y[mu] / (2.0 * r));
  }
  return z;
}

Vec4 atan_rescale(const Vec4& z, double r) {
  Vec4 y;
  for (int mu = 0; mu < 4; ++mu) y[mu] = (2.0 * r / std::numbers::pi) * std::atan(z[mu]);
  return y;
}

SpacetimePoint RegularChart::normal_to_ambient(const Vec4& y) const {
  return exponential_map(*ambient, center, frame * y, geodesic);
}

std::optional<Vec4> RegularChart::ambient_to_normal(const SpacetimePoint& q) const {
  const NormalMap map{*ambient, center, frame, geodesic};
  Vec4 y = frame.inverse() * (q.as_vector() - center.as_vector());
  if (ambient->is_flat()) return y;
  try {
    for (int it = 0; it < 30; ++it) {
      const Vec4 residual = map(y).as_vector() - q.as_vector();
      const Vec4 dy = map.jacobian(y).partialPivLu().solve(residual);
      y -= dy;
      if (!y.allFinite()) return std::nullopt;
      if (dy.cwiseAbs().maxCoeff() < 1e-12) return y;
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  return std::nullopt;
}

bool RegularChart::covers(const SpacetimePoint& q) const {
  const auto y = ambient_to_normal(q);
  return y && y->cwiseAbs().maxCoeff() < r;
}

Mat4 RegularChart::normalized_origin_metric() const {
  const double scale = std::numbers::pi / (2.0 * r);
  return scale * scale * pulled_metric->evaluate(SpacetimePoint{});
}

RegularChart build_regular_chart(MetricPtr field, const SpacetimePoint& x, const ChartConfig& cfg) {
  cfg.geodesic.validate();
  RegularChart chart;
  chart.center = x;
  chart.r = find_cube_radius(*field, x, cfg);
  chart.frame = orthonormal_frame(field->evaluate(x));
  chart.ambient = field;
  chart.geodesic = cfg.geodesic;
  chart.pulled_metric =
      std::make_shared<ChartMetric>(field, NormalMap{*field, x, chart.frame, cfg.geodesic}, chart.r);
  return chart;
}

std::vector<SpacetimePoint> chart_sample(int n, double extent) {
  std::vector<SpacetimePoint> out;
  auto c = [&](int i) { return n == 1 ? 0.0 : -extent + 2.0 * extent * i / (n - 1); };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d)
        for (int e = 0; e < n; ++e) out.push_back({c(a), {c(b), c(d), c(e)}});
  return out;
}

CoverResult cover_region(MetricPtr field, const CoordinateBox& region, const ChartConfig& cfg) {
  if (cfg.cover_lattice < 1) throw ConfigError("cover lattice needs at least one point per axis");
  for (int mu = 0; mu < 4; ++mu) {
    if (!(region.lo[mu] <= region.hi[mu])) throw ConfigError("region box has lo > hi");
  }
  CoverResult result;
  const int n = cfg.cover_lattice;
  auto coord = [&](int mu, int i) {
    return n == 1 ? 0.5 * (region.lo[mu] + region.hi[mu])
                  : region.lo[mu] + (region.hi[mu] - region.lo[mu]) * i / (n - 1);
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) result.lattice.push_back({coord(0, a), {coord(1, b), coord(2, c), coord(3, d)}});

  // Points farther than this (coordinate sup-distance) are not tried against a chart.
  auto reach = [](const RegularChart& ch) { return 1.5 * ch.r * ch.frame.cwiseAbs().rowwise().sum().maxCoeff(); };

  std::vector<char> covered(result.lattice.size(), 0);
  std::size_t remaining = result.lattice.size();
  SpacetimePoint seed = SpacetimePoint::from_vector(0.5 * (region.lo + region.hi));
  while (remaining > 0) {
    if (static_cast<int>(result.charts.size()) >= cfg.max_charts) {
      throw CoverFailureError("chart cap of " + std::to_string(cfg.max_charts) + " reached");
    }
    auto chart = build_regular_chart(field, seed, cfg);
    const double limit = reach(chart);
    for (std::size_t i = 0; i < result.lattice.size(); ++i) {
      if (covered[i]) continue;
      if ((result.lattice[i].as_vector() - seed.as_vector()).cwiseAbs().maxCoeff() > limit) continue;
      if (chart.covers(result.lattice[i])) {
        covered[i] = 1;
        --remaining;
      }
    }
    result.charts.push_back(std::move(chart));
    if (remaining == 0) break;

    Vec4 centroid = Vec4::Zero();
    for (std::size_t i = 0; i < covered.size(); ++i)
      if (!covered[i]) centroid += result.lattice[i].as_vector();
    centroid /= double(remaining);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < covered.size(); ++i) {
      if (covered[i]) continue;
      const double d = (result.lattice[i].as_vector() - centroid).squaredNorm();
      if (d < best) {
        best = d;
        best_index = i;
      }
    }
    const auto next = result.lattice[best_index];
    if ((next.as_vector() - seed.as_vector()).isZero(0.0)) {
      throw CoverFailureError("chart at seed does not cover its own center");
    }
    seed = next;
  }

  // Independent audit over every chart.
  result.covered_points = 0;
  for (const auto& q : result.lattice) {
    for (const auto& ch : result.charts) {
      if ((q.as_vector() - ch.center.as_vector()).cwiseAbs().maxCoeff() > reach(ch)) continue;
      if (ch.covers(q)) {
        ++result.covered_points;
        break;
      }
    }
  }
  return result;
}

}  // namespace regularframe::chart
