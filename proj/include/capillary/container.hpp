#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace capillary {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class ContainerKind { HalfSpace, Wedge, Ball };

const char* to_string(ContainerKind kind);

/// Bit set of container facets a vertex is constrained to. Zero means free.
using FacetMask = std::uint32_t;

/// Planar wall {x : <x, normal> = offset}; the admissible side is <x, normal> < offset.
struct Plane {
  Vec3 normal;
  double offset = 0.0;
};

/// Admissible region Omega with per-facet adhesion coefficients.
///
/// Half-space and wedge facets are planes with unit outward normals; the ball is
/// the unit ball centered at the origin and counts as a single facet (index 0).
class Container {
 public:
  static Container half_space(const Vec3& outward_normal, double offset, double beta);
  static Container wedge(const std::vector<Vec3>& outward_normals, const std::vector<double>& betas);
  static Container unit_ball(double beta);

  ContainerKind kind() const { return kind_; }
  int facet_count() const { return static_cast<int>(betas_.size()); }
  const std::vector<double>& betas() const { return betas_; }
  double beta(int facet) const { return betas_.at(facet); }
  const std::vector<Plane>& planes() const { return planes_; }
  bool is_planar() const { return kind_ != ContainerKind::Ball; }

  /// Outward unit normal of the wall at x (for the ball, x/|x|).
  Vec3 wall_normal(int facet, const Vec3& x) const;
  /// Signed distance to the facet surface, positive outside.
  double wall_distance(int facet, const Vec3& x) const;
  /// h^{dOmega}(v, v) for unit tangent v: 0 on planes, 1 on the unit sphere.
  double wall_curvature() const { return kind_ == ContainerKind::Ball ? 1.0 : 0.0; }
  /// <x, N> on the facet surface; feeds the wetted term of the divergence-theorem volume.
  double wall_support(int facet) const;

  /// True if x is in the closed region up to tol.
  bool contains(const Vec3& x, double tol) const;
  /// Facets whose surface passes within tol of x.
  FacetMask facets_at(const Vec3& x, double tol) const;

  /// Closest point of the constraint set described by mask (single facet or an edge).
  Vec3 retract(FacetMask mask, const Vec3& x) const;
  /// Projects v onto the tangent space of the constraint set at x.
  Vec3 project_tangent(FacetMask mask, const Vec3& x, const Vec3& v) const;

  /// Rejects |beta| >= 1, non-unit normals and dependent wedge normals.
  void validate() const;

 private:
  ContainerKind kind_ = ContainerKind::HalfSpace;
  std::vector<Plane> planes_;
  std::vector<double> betas_;
};

/// Lowest facet index contained in the mask, or -1.
int first_facet(FacetMask mask);
int facet_count_in(FacetMask mask);

}  // namespace capillary
