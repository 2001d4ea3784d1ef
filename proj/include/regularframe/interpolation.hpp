#pragma once

#include <span>
#include <vector>

#include "regularframe/lorentz.hpp"
#include "regularframe/metric.hpp"

namespace regularframe::interp {

/// Smooth step f with f = 0 for t <= t1, f = 1 for t >= t2, built from the
/// exp(-1/u) bump: f = s(u) / (s(u) + s(1 - u)), u = (t - t1) / (t2 - t1).
class TransitionFunction {
 public:
  TransitionFunction(double t1, double t2);

  double operator()(double t) const;
  double t1() const { return t1_; }
  double t2() const { return t2_; }

 private:
  double t1_;
  double t2_;
};

/// m = sgn(a0) |a0|^f E0 + f (a1 E1 + a2 E2 + a3 E3).
Vec4 deform_frame(const Vec4& a, double f);

/// g' at p: Minkowski for t <= t1, the base metric for t >= t2.
Mat4 interpolated_metric_at(const MetricField& base, const TransitionFunction& tf, const SpacetimePoint& p);

/// The interpolating metric as a field of its own. Derivatives fall back to
/// central differences.
class InterpolatedMetric final : public MetricField {
 public:
  InterpolatedMetric(MetricPtr base, TransitionFunction tf);

  std::string family() const override { return "interpolated"; }
  nlohmann::ordered_json to_json() const override;
  bool is_static() const override { return false; }

  const MetricField& base() const { return *base_; }
  const TransitionFunction& transition() const { return tf_; }

 protected:
  Mat4 raw(const SpacetimePoint& p) const override;

 private:
  MetricPtr base_;
  TransitionFunction tf_;
};

struct InterpolationReport {
  bool pre_window_exact = true;      // bitwise Minkowski for every sampled t <= t1
  double post_window_defect = 0.0;   // max |g' - g| over sampled t >= t2
  bool post_window_ok = true;        // post_window_defect < 1e-12
  std::size_t lorentzian_points = 0;
  std::size_t sampled_points = 0;
  double c1_jump = 0.0;              // max left/right slope mismatch at t1, t2
  bool c1_ok = true;                 // c1_jump < 1e-4 at h = 1e-3
  std::string error;

  bool pass() const {
    return error.empty() && pre_window_exact && post_window_ok && c1_ok && lorentzian_points == sampled_points;
  }
};

/// Checks endpoint exactness, Lorentzian signature at every sample and C1
/// continuity in t across the window ends.
InterpolationReport verify_interpolation(const MetricField& base, const TransitionFunction& tf,
                                         std::span<const SpacetimePoint> lattice);

/// Regular lattice: `nt` times over [t_lo, t_hi] crossed with `nx` points per
/// spatial axis over [-half_width, half_width]^3 (nx = 1 gives the origin).
std::vector<SpacetimePoint> spacetime_lattice(double t_lo, double t_hi, int nt, double half_width, int nx);

}  // namespace regularframe::interp
