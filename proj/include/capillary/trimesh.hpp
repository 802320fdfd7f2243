#pragma once

#include <array>
#include <vector>

#include "capillary/container.hpp"

namespace capillary {

using Face = std::array<int, 3>;

struct Edge {
  int a = -1;
  int b = -1;
  int face0 = -1;
  int face1 = -1;  // -1 on boundary edges
};

/// Connectivity derived once at construction; never changes while vertices move.
struct Topology {
  std::vector<std::vector<int>> vertex_faces;
  std::vector<std::vector<int>> neighbors;  // sorted 1-ring
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> face_edges;  // edge opposite each corner
  std::vector<char> on_boundary;
  std::vector<int> loop_prev;  // predecessor along the boundary loop, -1 if interior
  std::vector<int> loop_next;
  /// Closed polygons bounding the wetted region of each facet, listed in the
  /// boundary orientation of M. A polygon that ends on a wedge edge is closed by
  /// the chord along that edge.
  std::vector<std::vector<std::vector<int>>> facet_polygons;
  int components = 0;
  std::vector<int> component_of;
};

/// Triangulated surface M with boundary loops pinned to container facets.
///
/// Faces are oriented so their normals point out of the enclosed region.
/// Boundary loops follow the orientation induced by the faces.
class TriMesh {
 public:
  /// Builds topology, tags boundary vertices with the facets they lie on and
  /// rejects meshes that break any structural invariant.
  static TriMesh build(std::vector<Vec3> vertices, std::vector<Face> faces, const Container& container,
                       double wall_tol = 1e-12);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  /// Single-owner mutation of positions; topology stays fixed.
  std::vector<Vec3>& mutable_vertices() { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<std::vector<int>>& boundary_loops() const { return loops_; }
  const std::vector<FacetMask>& facet_masks() const { return masks_; }
  const Topology& topology() const { return topo_; }

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int face_count() const { return static_cast<int>(faces_.size()); }
  bool is_boundary(int v) const { return topo_.on_boundary[v] != 0; }
  /// Facet shared by every vertex of the loop, or -1 when the loop spans a wedge edge.
  int loop_facet(int loop) const;

  double max_edge_length() const;
  double min_face_area() const;
  /// Smallest interior angle over all triangles, radians.
  double min_angle() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<std::vector<int>> loops_;
  std::vector<FacetMask> masks_;
  Topology topo_;
};

/// Disjoint union, e.g. two separate caps in one container.
TriMesh merge_meshes(const TriMesh& a, const TriMesh& b, const Container& container);

/// Checks structural and wall invariants of the current positions; throws Error.
void validate_mesh(const TriMesh& mesh, const Container& container, double wall_tol = 1e-12);

}  // namespace capillary
