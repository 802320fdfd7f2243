#pragma once

#include <cstdint>

#include "capillary/caps.hpp"
#include "capillary/trimesh.hpp"

namespace capillary {

/// Samples the cap exactly: vertices on the cap sphere (or disk), boundary
/// vertices on the container wall, faces oriented outward.
///
/// Caps and disks use concentric rings around the pole (ring i holds 6i
/// vertices, 6n^2 faces for n rings); lunes use recursive midpoint subdivision
/// of four spherical triangles (4^(l+1) faces).
TriMesh build_cap_mesh(const Container& container, const CapSolution& cap, double target_edge_length);

/// Edge length that makes build_cap_mesh produce roughly `faces` triangles.
double edge_length_for_faces(const CapSolution& cap, int faces);

/// Reflects a mesh whose boundary lies on a plane through its own contact loop
/// and glues the copy along that loop, giving a closed surface.
TriMesh mirror_close(const TriMesh& mesh, const Container& container, int facet = 0);

/// Smooth random normal displacement of relative amplitude `amplitude` (times
/// `length_scale`). The wall-normal component decays smoothly to zero at each
/// wall, within a band of a quarter length scale.
void perturb_mesh(TriMesh& mesh, const Container& container, double amplitude, double length_scale,
                  std::uint64_t seed);

}  // namespace capillary
