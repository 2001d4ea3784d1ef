#pragma once

#include <array>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace regularframe {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// A point (t, x) of a spacetime foliated by constant-t slices.
struct SpacetimePoint {
  double t = 0.0;
  std::array<double, 3> x{0.0, 0.0, 0.0};

  Vec4 as_vector() const { return {t, x[0], x[1], x[2]}; }
  static SpacetimePoint from_vector(const Vec4& v) { return {v[0], {v[1], v[2], v[3]}}; }
  bool finite() const;
};

/// Axis-aligned coordinate box on which a metric family claims validity.
/// The spatial bounds apply to every spatial component.
struct ValidityRegion {
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  double x_min = -std::numeric_limits<double>::infinity();
  double x_max = std::numeric_limits<double>::infinity();

  bool contains(const SpacetimePoint& p) const;
  bool bounded() const;
};

/// A smooth assignment of a symmetric 4x4 matrix to each spacetime point.
///
/// `evaluate` is the only entry point callers should use: it checks the
/// validity region and finiteness, and returns the symmetrized matrix.
/// Families that know their first derivatives analytically override
/// `raw_derivative`; all others fall back to central differences.
class MetricField {
 public:
  virtual ~MetricField() = default;

  Mat4 evaluate(const SpacetimePoint& p) const;

  /// d g / d x^mu for mu = 0..3 (x^0 = t).
  std::array<Mat4, 4> derivative(const SpacetimePoint& p, double fd_step = 1e-4) const;

  virtual std::string family() const = 0;
  virtual nlohmann::ordered_json to_json() const = 0;

  virtual bool has_analytic_derivative() const { return false; }
  /// Metric does not depend on t.
  virtual bool is_static() const { return false; }
  /// Christoffel symbols vanish identically in these coordinates.
  virtual bool is_flat() const { return false; }

  const ValidityRegion& validity() const { return validity_; }
  void set_validity(const ValidityRegion& v) { validity_ = v; }

 protected:
  virtual Mat4 raw(const SpacetimePoint& p) const = 0;
  virtual std::array<Mat4, 4> raw_derivative(const SpacetimePoint& p) const;

 private:
  ValidityRegion validity_;
};

using MetricPtr = std::shared_ptr<const MetricField>;

/// One monomial coef * t^pt * x1^px of a diagonal-polynomial entry.
struct PolyTerm {
  double coef = 0.0;
  int pt = 0;
  int px = 0;
};

struct DiagPolyParams {
  // Entries g00, g11, g22, g33. An empty list means the Minkowski value.
  std::array<std::vector<PolyTerm>, 4> diag;
};

enum class FrwShape { Tanh, Sin, Gauss };

/// a(t) = 1 + eps * shape((t - t0) / tau).
struct FrwParams {
  double eps = 0.0;
  FrwShape shape = FrwShape::Tanh;
  double t0 = 0.0;
  double tau = 1.0;

  double scale(double t) const;
  double scale_rate(double t) const;
};

/// Static weak field: Phi(x) = -amplitude * exp(-|x - center|^2 / width^2),
/// g = diag(-(1 + 2 Phi), (1 - 2 Phi), (1 - 2 Phi), (1 - 2 Phi)).
struct WeakFieldParams {
  double amplitude = 0.0;
  double width = 1.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
};

MetricPtr make_minkowski();
MetricPtr make_diag_poly(DiagPolyParams params);
/// Constant diagonal metric diag(d0, d1, d2, d3), expressed as a diag_poly.
MetricPtr make_constant_diagonal(double d0, double d1, double d2, double d3);
MetricPtr make_frw(FrwParams params);
MetricPtr make_weakfield(WeakFieldParams params);

/// Parses the shared metric-family schema
/// `{ "family": ..., "params": {...}, "validity": {"t": [lo, hi], "x": [lo, hi]} }`.
/// Throws SchemaError carrying `where` plus the offending key path.
MetricPtr metric_from_json(const nlohmann::json& j, const std::string& where = "metric");

/// Minkowski metric diag(-1, 1, 1, 1).
Mat4 minkowski_matrix();

}  // namespace regularframe
