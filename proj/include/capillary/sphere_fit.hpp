#pragma once

#include <span>

#include "capillary/container.hpp"

namespace capillary {

struct SphereFit {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  double rms_deviation = 0.0;  // divided by the radius, or by the diameter when flat
  bool is_flat = false;
  Vec3 plane_normal = Vec3::Zero();  // filled when flat
  double plane_rms_deviation = 0.0;  // least-squares plane, divided by the diameter
  int gauss_newton_iterations = 0;
};

/// Algebraic (Kasa) fit refined by Gauss-Newton on the geometric distance. A
/// radius above 1e3 times the point-set diameter is reported as a plane.
/// Throws DegeneratePoints for fewer than 10 points or a rank-deficient set.
SphereFit fit_sphere(std::span<const Vec3> points);

}  // namespace capillary
