#pragma once

#include <span>
#include <string>
#include <vector>

#include "capillary/container.hpp"
#include "capillary/trimesh.hpp"

namespace capillary {

enum class DescentMetric {
  Euclidean,  // plain vertex-space gradient
  Sobolev,    // gradient preconditioned by (K + M/|M|), K the cotangent stiffness
};

struct EvolveConfig {
  double target_volume = 0.0;
  int max_iterations = 2000;
  /// Stop when the multiplier-corrected gradient, read as the L2 norm of
  /// H - lambda and divided by max(1, |lambda| sqrt(|M|)), drops below this value.
  double gradient_tolerance = 1e-5;
  double initial_step = 0.25;  // largest vertex move of the first trial, in mean edge lengths
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  double volume_restore_tolerance = 1e-10;
  double min_angle_floor = 5.0 * 3.14159265358979323846 / 180.0;
  DescentMetric metric = DescentMetric::Sobolev;
  bool conjugate = true;  // Polak-Ribiere directions instead of plain steepest descent
  /// Move vertices only along their normals (and across the contact line on
  /// walls), so the mesh cannot lower the discrete energy by sliding vertices.
  bool normal_motion = true;
  /// Hold the contact line's position along the container's rigid motions
  /// (rotations of the ball, translations along planar walls and wedge edges);
  /// the continuum energy is flat along them and the mesh would drift.
  bool pin_symmetries = true;
  /// Tangential vertex averaging runs when the smallest triangle angle drops
  /// below this value; the conjugate directions restart afterwards.
  double smooth_below_angle = 15.0 * 3.14159265358979323846 / 180.0;
  int smoothing_sweeps = 3;

  void validate() const;
};

struct HistoryRow {
  int iteration = 0;
  double energy = 0.0;
  double volume_error = 0.0;  // relative
  double grad_norm = 0.0;  // relative, see EvolveConfig::gradient_tolerance
  double lambda = 0.0;
};

enum class Termination { GradientTolerance, MaxIterations, LineSearchStagnation, MeshDegenerated };

const char* to_string(Termination t);

struct EvolveResult {
  TriMesh mesh;
  double lagrange_multiplier = 0.0;
  std::vector<HistoryRow> history;
  Termination reason = Termination::MaxIterations;
  std::string diagnostic;
  int iterations = 0;
  int smoothing_events = 0;
};

/// Volume-constrained descent of F_beta. Wall vertices slide on their walls;
/// the contact angle is never imposed.
EvolveResult evolve(TriMesh mesh, const Container& container, std::span<const double> betas,
                    const EvolveConfig& config);

/// Multiplier lambda = <g, v>/|v|^2 of the projected energy and volume gradients.
double lagrange_multiplier(const TriMesh& mesh, const Container& container, std::span<const double> betas);

}  // namespace capillary
