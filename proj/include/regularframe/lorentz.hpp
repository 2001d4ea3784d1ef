#pragma once

#include <span>
#include <vector>

#include "regularframe/metric.hpp"

namespace regularframe::lorentz {

/// Column basis {m0, E1, E2, E3} of a tangent space, E_i the coordinate vectors.
struct FrameBasis {
  Vec4 m0 = Vec4::UnitX();
  Vec4 e1 = Vec4::UnitY();
  Vec4 e2 = Vec4::UnitZ();
  Vec4 e3 = Vec4::UnitW();

  static FrameBasis with_time_vector(const Vec4& m0) { return {m0, Vec4::UnitY(), Vec4::UnitZ(), Vec4::UnitW()}; }
  Mat4 matrix() const;
  bool independent(double min_abs_det = 1e-10) const;
};

/// Metric components in the basis {n, E1, E2, E3}: diag(lapse2, spatial).
struct BlockForm {
  double lapse2 = -1.0;
  Mat3 spatial = Mat3::Identity();
};

/// Eigenpairs of a symmetric 3x3 matrix, ascending, each eigenvector with
/// its first nonzero component positive.
struct SymmetricEigen3 {
  Vec3 values;
  Mat3 vectors;
};

SymmetricEigen3 symmetric_eigen(const Mat3& a);

/// Eigenvalues of a symmetric 4x4 matrix, ascending.
Vec4 symmetric_eigenvalues(const Mat4& a);

/// Exactly one negative and three positive eigenvalues.
bool is_lorentzian(const Mat4& g);

/// n^mu = (g^-1)^{mu 0}. Throws SingularMetricError for a singular g.
Vec4 normal_vector(const Mat4& g);

/// Throws NotGloballyHyperbolicHereError when g(n, n) >= 0 and
/// SignatureError when the spatial block is not positive definite.
BlockForm block_decompose(const Mat4& g);

/// G^s through the symmetric eigendecomposition; s = 0 and s = 1 return I
/// and G. Throws SignatureError for non-SPD input.
Mat3 spd_power(const Mat3& g, double s);

struct PointDiagnostic {
  SpacetimePoint point;
  bool lorentzian = false;
  bool lapse_negative = false;
  bool spatial_spd = false;
  double lapse2 = 0.0;
  double min_spatial_eigenvalue = 0.0;
  std::string error;  // evaluation failure, if any

  bool pass() const { return lorentzian && lapse_negative && spatial_spd; }
};

struct RegularityReport {
  std::vector<PointDiagnostic> points;
  bool pass = false;
  std::size_t failures = 0;
  /// Smallest -lapse2 over the sample: distance from degeneracy.
  double lapse_margin = 0.0;
  double min_spatial_eigenvalue = 0.0;
};

/// Per-point regularity diagnostics. Never throws for sample content:
/// evaluation failures are recorded as failing points.
RegularityReport check_regular(const MetricField& field, std::span<const SpacetimePoint> sample);

}  // namespace regularframe::lorentz
