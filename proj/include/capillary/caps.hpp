#pragma once

#include <span>
#include <vector>

#include "capillary/container.hpp"
#include "capillary/geometry.hpp"

namespace capillary {

/// k = sum c_i Nbar_i with <k, Nbar_i> = beta_i.
struct WedgeVector {
  Vec3 k = Vec3::Zero();
  double norm = 0.0;
  std::vector<double> coefficients;  // c_i
};

WedgeVector wedge_k(const Container& container);

enum class CapShape { SphericalCap, Lune, FlatDisk };

/// Exact stationary surface in a container.
///
/// SphericalCap: the part of the sphere (center, radius) within polar angle
/// polar_extent of the pole direction `axis`. Lune: the part of the sphere
/// centred on a two-facet wedge edge lying inside the wedge. FlatDisk: the
/// equatorial disk of the unit ball with outward normal `axis`.
struct CapSolution {
  ContainerKind container_kind = ContainerKind::HalfSpace;
  CapShape shape = CapShape::SphericalCap;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  Vec3 axis = Vec3::UnitZ();
  double polar_extent = 0.0;
  std::vector<double> contact_angles;  // per facet, radians
  double volume = 0.0;

  bool flat() const { return shape == CapShape::FlatDisk; }
  double mean_curvature() const { return flat() ? 0.0 : 2.0 / radius; }
};

/// Cap with prescribed contact angles and radius (no root finding).
CapSolution cap_from_radius(const Container& container, std::span<const double> facet_angles, double radius);

/// Cap with prescribed contact angles and volume; ball caps are centred on +z.
/// Throws Infeasible when no such cap exists or is not constructed.
CapSolution cap_from_volume(const Container& container, std::span<const double> facet_angles, double volume);

/// Contact angles arccos(beta_i) of a container.
std::vector<double> young_angles(const Container& container);

struct CapQuantities {
  double area_m = 0.0;
  std::vector<double> wetted;
  std::vector<double> contact_length;
  double energy = 0.0;
  double mean_curvature = 0.0;
  double volume = 0.0;

  double wetted_total() const;
  double length_total() const;
};

CapQuantities cap_quantities(const CapSolution& cap, std::span<const double> betas);

/// Exact values of every field entering the identities, with n = 3.
struct FieldSample {
  Vec3 normal;
  double mean_curvature = 0.0;
  double shape_norm2 = 0.0;
  double zeta = 0.0;       // 2 - H<x,nu> + 2<k,nu>
  double phi_wedge = 0.0;  // (H/2)|x|^2 - 2<x,nu>
  double phi_a = 0.0;      // 2<x + cos(theta) nu, a> - H<X_a, nu>
  double phi_ball = 0.0;   // (|x|^2 - 1) H / 2 - 2(<x,nu> + cos(theta))
  Vec3 x_a;                // <x,a> x - (|x|^2 + 1) a / 2
};

/// Throws InvalidArgument when x is farther than tol from the cap surface.
FieldSample sample_fields(const CapSolution& cap, const Vec3& k, const Vec3& a, const Vec3& x, double tol = 1e-10);

/// Robin coefficient q = h^{dOmega}(nubar,nubar)/sin(theta) + cot(theta) h(mu,mu) at a
/// contact-line point. Throws NotOnBoundary away from the walls.
double sample_q(const CapSolution& cap, const Container& container, const Vec3& x, double tol = 1e-10);

/// Vertex fields with the discrete areas and trapezoid weights of the mesh but
/// exact normals, curvatures and boundary frames of the cap.
VertexGeometry exact_vertex_fields(const TriMesh& mesh, const Container& container, const CapSolution& cap);

}  // namespace capillary
