#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "regularframe/interpolation.hpp"
#include "regularframe/kg.hpp"
#include "regularframe/mass_shell.hpp"

namespace regularframe::transport {

/// Minkowski data prepared at t_start, carried through the window [t1, t2]
/// of the interpolating metric into the region where it equals `base`.
struct TransportScenario {
  MetricPtr base;
  double t1 = 1.0;
  double t2 = 3.0;
  kg::GridSpec grid;
  double m = 1.0;
  std::vector<shell::PacketSpec> basis;
  double t_start = 0.0;
  double t_end = 4.0;
  bool orthonormal = false;  // Gram-Schmidt the basis before transport

  /// t_start < t1 < t2 < t_end, base set, grid valid. Throws ConfigError.
  void validate() const;
  std::shared_ptr<const interp::InterpolatedMetric> interpolated() const;
  /// Basis packets on the grid-dual lattice (rebuilt per grid).
  std::vector<shell::MassShellVector> basis_vectors() const;
  TransportScenario with_grid_points(int n) const;
};

/// Samples the window with verify_interpolation; throws InterpolationSignatureError on failure.
interp::InterpolationReport require_interpolation(const TransportScenario& s);

/// Synthesizes F at t_start and evolves it under g' to t_end.
kg::FieldState transport_forward(const shell::MassShellVector& F, const TransportScenario& s);
std::vector<kg::FieldState> transport_many(std::span<const shell::MassShellVector> basis, const TransportScenario& s);

/// max |phi| within the outer 5% of every active axis, over max |phi|; 0 for a zero field.
double boundary_ratio(const kg::FieldState& state, const kg::GridSpec& grid);

struct GramResult {
  Eigen::MatrixXcd before;  // Minkowski product at t_start
  Eigen::MatrixXcd after;   // g product at t_end
  double defect = 0.0;      // max |before - after|
  double boundary = 0.0;    // worst boundary_ratio over the run
};

/// Needs at least 2 basis packets.
GramResult gram_matrix(const TransportScenario& s);

/// Forward to t_end, back to t_start; relative L2 error against the synthesized start.
double round_trip(const shell::MassShellVector& F, const TransportScenario& s);

struct RefinementRow {
  int n = 0;
  double h = 0.0;
  double dt = 0.0;
  double defect = 0.0;
  double round_trip = 0.0;  // worst over the basis
  double boundary = 0.0;
  GramResult gram;
};

std::vector<RefinementRow> refinement_sweep(const TransportScenario& s, std::span<const int> levels);
bool strictly_decreasing(std::span<const RefinementRow> rows);

}  // namespace regularframe::transport
