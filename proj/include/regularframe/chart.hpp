#pragma once

#include <optional>
#include <vector>

#include "regularframe/lorentz.hpp"
#include "regularframe/metric.hpp"

namespace regularframe::chart {

enum class ChristoffelMode { Analytic, FiniteDifference };

struct GeodesicConfig {
  double step = 0.05;  // affine-parameter step; the map integrates over [0, 1]
  int max_steps = 100000;
  ChristoffelMode christoffel = ChristoffelMode::Analytic;  // falls back to FD when the family has none
  double fd_step = 1e-4;

  void validate() const;
};

struct ChartConfig {
  GeodesicConfig geodesic;
  double r_cap = 1.0;
  double bisection_tol = 1e-3;
  int lattice_per_axis = 9;  // sample density for the cube conditions
  int cover_lattice = 9;     // lattice density of cover_region
  int max_charts = 10000;
};

/// Gamma^mu_{alpha beta}, indexed [mu][alpha][beta].
using Christoffel = std::array<Mat4, 4>;

Christoffel christoffel(const MetricField& field, const SpacetimePoint& p, const GeodesicConfig& cfg);

/// Endpoint of the geodesic through x with initial velocity v after unit
/// affine parameter (classical RK4).
SpacetimePoint exponential_map(const MetricField& field, const SpacetimePoint& x, const Vec4& v,
                               const GeodesicConfig& cfg);

/// Columns e_0..e_3 with e^T g e = diag(-1, 1, 1, 1), e_0 future directed.
Mat4 orthonormal_frame(const Mat4& g);

/// Largest cube half-width (by bisection) on whose sample lattice the
/// normal-coordinate frame {n_y, E1, E2, E3} stays a basis with g_y(n_y, n_y) < 0.
double find_cube_radius(const MetricField& field, const SpacetimePoint& x, const ChartConfig& cfg);

/// z_mu = tan(pi y_mu / 2r). Throws OutOfCubeError when |y_mu| >= r.
Vec4 tan_rescale(const Vec4& y, double r);
/// y_mu = (2r / pi) atan(z_mu).
Vec4 atan_rescale(const Vec4& z, double r);

/// Regular chart around a point: normal coordinates in an orthonormal frame,
/// restricted to the cube of half-width r and stretched onto R^4.
struct RegularChart {
  SpacetimePoint center;
  double r = 0.0;
  Mat4 frame = Mat4::Identity();
  MetricPtr pulled_metric;  // metric in chart coordinates z
  MetricPtr ambient;
  GeodesicConfig geodesic;

  /// Normal coordinates y -> ambient point.
  SpacetimePoint normal_to_ambient(const Vec4& y) const;
  /// Ambient point -> normal coordinates by Newton iteration on the exponential map.
  std::optional<Vec4> ambient_to_normal(const SpacetimePoint& q) const;
  /// Preimage of q lies in the open cube.
  bool covers(const SpacetimePoint& q) const;
  /// Pulled metric at z = 0 scaled by (pi / 2r)^2; Minkowskian by construction.
  Mat4 normalized_origin_metric() const;
};

RegularChart build_regular_chart(MetricPtr field, const SpacetimePoint& x, const ChartConfig& cfg);

/// Chart sample lattice: n points per axis on [-extent, extent]^4 in chart coordinates.
std::vector<SpacetimePoint> chart_sample(int n, double extent);

struct CoordinateBox {
  Vec4 lo = Vec4::Constant(-0.5);
  Vec4 hi = Vec4::Constant(0.5);
};

struct CoverResult {
  std::vector<RegularChart> charts;
  std::vector<SpacetimePoint> lattice;
  std::size_t covered_points = 0;  // audited independently after the greedy loop

  double coverage() const { return lattice.empty() ? 1.0 : double(covered_points) / double(lattice.size()); }
};

/// Greedy finite cover of the lattice of a coordinate box by regular charts.
CoverResult cover_region(MetricPtr field, const CoordinateBox& region, const ChartConfig& cfg);

}  // namespace regularframe::chart
