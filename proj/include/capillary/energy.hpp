#pragma once

#include <span>
#include <vector>

#include "capillary/container.hpp"
#include "capillary/trimesh.hpp"

namespace capillary {

/// F_beta = |M| - sum_i beta_i |B+_i|.
double energy(const TriMesh& mesh, const Container& container, std::span<const double> betas);

/// Exact derivative of the discrete energy with respect to every vertex position.
/// With project = true, wall vertices keep only the component tangent to their
/// constraint set (facet plane, wedge edge or sphere tangent plane).
std::vector<Vec3> energy_gradient(const TriMesh& mesh, const Container& container, std::span<const double> betas,
                                  bool project = true);

/// Exact derivative of enclosed_volume, optionally projected like energy_gradient.
std::vector<Vec3> volume_gradient(const TriMesh& mesh, const Container& container, bool project = true);

/// Projects a per-vertex field onto the constraint tangent spaces in place.
void project_to_constraints(const TriMesh& mesh, const Container& container, std::vector<Vec3>& field);

/// Restricts a field to motions that change the shape: interior vertices keep
/// their component along the area-weighted normal, single-wall vertices their
/// in-wall component across the contact line. Wedge-edge vertices stay on the edge.
void project_to_normal_motion(const TriMesh& mesh, const Container& container, std::vector<Vec3>& field);

/// Offsets vertices by one scalar along their normals (restricted as in project_to_normal_motion) so
/// the enclosed volume equals target to relative rel_tol. Returns the offset.
/// Throws InvalidArgument for a volume error above 20% and NoConvergence when
/// Newton stalls.
double volume_project(TriMesh& mesh, const Container& container, double target, double rel_tol = 1e-10,
                      int max_iterations = 50);

/// Sum of squared norms, i.e. the Euclidean inner product of two vertex fields.
double field_dot(std::span<const Vec3> a, std::span<const Vec3> b);

}  // namespace capillary
