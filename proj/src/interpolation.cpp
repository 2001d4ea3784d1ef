#include "regularframe/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "regularframe/errors.hpp"

namespace regularframe::interp {

namespace {

double bump(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

}  // namespace

TransitionFunction::TransitionFunction(double t1, double t2) : t1_(t1), t2_(t2) {
  if (!(t1 < t2)) throw ConfigError("transition window requires t1 < t2");
}

double TransitionFunction::operator()(double t) const {
  if (t <= t1_) return 0.0;
  if (t >= t2_) return 1.0;
  const double u = (t - t1_) / (t2_ - t1_);
  const double a = bump(u);
  const double b = bump(1.0 - u);
  return a / (a + b);
}

Vec4 deform_frame(const Vec4& a, double f) {
  if (a[0] == 0.0) throw DegenerateFrameError("time coefficient of n is zero");
  const double sign = a[0] > 0.0 ? 1.0 : -1.0;
  return {sign * std::pow(std::abs(a[0]), f), f * a[1], f * a[2], f * a[3]};
}

Mat4 interpolated_metric_at(const MetricField& base, const TransitionFunction& tf, const SpacetimePoint& p) {
  const double f = tf(p.t);
  const Mat4 g = base.evaluate(p);
  const Vec4 n = lorentz::normal_vector(g);
  const auto block = lorentz::block_decompose(g);

  // Components of g' in the deformed basis {m, E1, E2, E3}.
  Mat4 frame_components = Mat4::Zero();
  frame_components(0, 0) = -std::pow(-block.lapse2, f);
  frame_components.block<3, 3>(1, 1) = lorentz::spd_power(block.spatial, f);

  const auto basis = lorentz::FrameBasis::with_time_vector(deform_frame(n, f));
  if (!basis.independent(0.0)) throw DegenerateFrameError("deformed frame is not a basis");
  const Mat4 inv = basis.matrix().inverse();
  Mat4 out = inv.transpose() * frame_components * inv;
  out = 0.5 * (out + out.transpose());
  if (!lorentz::is_lorentzian(out)) {
    throw InterpolationSignatureError("g' is not Lorentzian at t = " + std::to_string(p.t));
  }
  return out;
}

InterpolatedMetric::InterpolatedMetric(MetricPtr base, TransitionFunction tf)
    : base_(std::move(base)), tf_(tf) {
  set_validity(base_->validity());
}

nlohmann::ordered_json InterpolatedMetric::to_json() const {
  return {{"family", "interpolated"}, {"base", base_->to_json()}, {"t1", tf_.t1()}, {"t2", tf_.t2()}};
}

Mat4 InterpolatedMetric::raw(const SpacetimePoint& p) const { return interpolated_metric_at(*base_, tf_, p); }

InterpolationReport verify_interpolation(const MetricField& base, const TransitionFunction& tf,
                                         std::span<const SpacetimePoint> lattice) {
  InterpolationReport r;
  const Mat4 eta = minkowski_matrix();
  try {
    for (const auto& p : lattice) {
      ++r.sampled_points;
      Mat4 gp;
      try {
        gp = interpolated_metric_at(base, tf, p);
      } catch (const InterpolationSignatureError&) {
        continue;
      }
      if (lorentz::is_lorentzian(gp)) ++r.lorentzian_points;
      if (p.t <= tf.t1()) {
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j)
            if (gp(i, j) != eta(i, j)) r.pre_window_exact = false;
      }
      if (p.t >= tf.t2()) {
        r.post_window_defect = std::max(r.post_window_defect, (gp - base.evaluate(p)).cwiseAbs().maxCoeff());
      }
    }
    r.post_window_ok = r.post_window_defect < 1e-12;

    // C1 across each window end, at every distinct spatial position of the
    // lattice: second-order one-sided slopes from the left and the right must agree.
    constexpr double h = 1e-3;
    auto at = [&](SpacetimePoint p, double t) {
      p.t = t;
      return interpolated_metric_at(base, tf, p);
    };
    auto slope_jump = [&](const SpacetimePoint& p, double t) {
      const Mat4 left = (3.0 * at(p, t) - 4.0 * at(p, t - h) + at(p, t - 2.0 * h)) / (2.0 * h);
      const Mat4 right = (-3.0 * at(p, t) + 4.0 * at(p, t + h) - at(p, t + 2.0 * h)) / (2.0 * h);
      return (left - right).cwiseAbs().maxCoeff();
    };
    std::vector<std::array<double, 3>> positions;
    for (const auto& p : lattice) {
      if (std::find(positions.begin(), positions.end(), p.x) == positions.end()) positions.push_back(p.x);
    }
    for (const auto& x : positions) {
      const SpacetimePoint p{0.0, x};
      for (double te : {tf.t1(), tf.t2()}) r.c1_jump = std::max(r.c1_jump, slope_jump(p, te));
    }
    r.c1_ok = r.c1_jump < 1e-4;
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

std::vector<SpacetimePoint> spacetime_lattice(double t_lo, double t_hi, int nt, double half_width, int nx) {
  std::vector<SpacetimePoint> out;
  auto coord = [&](int i) { return nx == 1 ? 0.0 : -half_width + 2.0 * half_width * i / (nx - 1); };
  for (int it = 0; it < nt; ++it) {
    const double t = nt == 1 ? t_lo : t_lo + (t_hi - t_lo) * it / (nt - 1);
    for (int a = 0; a < nx; ++a)
      for (int b = 0; b < nx; ++b)
        for (int c = 0; c < nx; ++c) out.push_back({t, {coord(a), coord(b), coord(c)}});
  }
  return out;
}

}  // namespace regularframe::interp
