#include "regularframe/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regularframe/errors.hpp"

namespace regularframe::lorentz {

Mat4 FrameBasis::matrix() const {
  Mat4 b;
  b.col(0) = m0;
  b.col(1) = e1;
  b.col(2) = e2;
  b.col(3) = e3;
  return b;
}

bool FrameBasis::independent(double min_abs_det) const {
  return std::abs(matrix().determinant()) > min_abs_det;
}

SymmetricEigen3 symmetric_eigen(const Mat3& a) {
  Eigen::SelfAdjointEigenSolver<Mat3> solver(a);
  if (solver.info() != Eigen::Success) throw SignatureError("eigendecomposition failed");
  SymmetricEigen3 out{solver.eigenvalues(), solver.eigenvectors()};
  // Eigen already sorts ascending; fix the sign so the decomposition is reproducible.
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      const double c = out.vectors(i, k);
      if (std::abs(c) > 1e-14) {
        if (c < 0.0) out.vectors.col(k) = -out.vectors.col(k);
        break;
      }
    }
  }
  return out;
}

Vec4 symmetric_eigenvalues(const Mat4& a) {
  Eigen::SelfAdjointEigenSolver<Mat4> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

bool is_lorentzian(const Mat4& g) {
  if (!g.allFinite()) return false;
  const Vec4 ev = symmetric_eigenvalues(g);
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double zero = 1e-14 * scale;
  return ev[0] < -zero && ev[1] > zero;
}

Vec4 normal_vector(const Mat4& g) {
  Eigen::FullPivLU<Mat4> lu(g);
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (!g.allFinite() || std::abs(lu.determinant()) <= 1e-14 * std::pow(scale, 4)) {
    throw SingularMetricError("metric matrix is singular");
  }
  return lu.inverse().col(0);
}

BlockForm block_decompose(const Mat4& g) {
  const Vec4 n = normal_vector(g);
  BlockForm out;
  out.lapse2 = n.dot(g * n);
  if (!(out.lapse2 < 0.0)) {
    throw NotGloballyHyperbolicHereError("g(n, n) = " + std::to_string(out.lapse2) + " is not negative");
  }
  out.spatial = g.block<3, 3>(1, 1);
  Eigen::LLT<Mat3> llt(out.spatial);
  if (llt.info() != Eigen::Success) throw SignatureError("spatial block is not positive definite");
  return out;
}

Mat3 spd_power(const Mat3& g, double s) {
  if (!g.allFinite() || (g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff())) {
    throw SignatureError("spd_power: input is not symmetric");
  }
  const auto eig = symmetric_eigen(0.5 * (g + g.transpose()));
  if (!(eig.values[0] > 0.0)) throw SignatureError("spd_power: input is not positive definite");
  if (s == 0.0) return Mat3::Identity();
  if (s == 1.0) return 0.5 * (g + g.transpose());
  Vec3 powered;
  for (int i = 0; i < 3; ++i) powered[i] = std::pow(eig.values[i], s);
  return eig.vectors * powered.asDiagonal() * eig.vectors.transpose();
}

RegularityReport check_regular(const MetricField& field, std::span<const SpacetimePoint> sample) {
  RegularityReport report;
  report.lapse_margin = std::numeric_limits<double>::infinity();
  report.min_spatial_eigenvalue = std::numeric_limits<double>::infinity();
  report.points.reserve(sample.size());
  for (const auto& p : sample) {
    PointDiagnostic d;
    d.point = p;
    try {
      const Mat4 g = field.evaluate(p);
      d.lorentzian = is_lorentzian(g);
      const Vec4 n = normal_vector(g);
      d.lapse2 = n.dot(g * n);
      d.lapse_negative = d.lapse2 < 0.0;
      const Mat3 spatial = g.block<3, 3>(1, 1);
      d.min_spatial_eigenvalue = Eigen::SelfAdjointEigenSolver<Mat3>(spatial, Eigen::EigenvaluesOnly).eigenvalues()[0];
      d.spatial_spd = d.min_spatial_eigenvalue > 0.0;
      report.lapse_margin = std::min(report.lapse_margin, -d.lapse2);
      report.min_spatial_eigenvalue = std::min(report.min_spatial_eigenvalue, d.min_spatial_eigenvalue);
    } catch (const Error& e) {
      d.error = e.what();
    }
    if (!d.pass()) ++report.failures;
    report.points.push_back(std::move(d));
  }
  report.pass = !sample.empty() && report.failures == 0;
  return report;
}

}  // namespace regularframe::lorentz
