#pragma once

#include <span>
#include <vector>

#include "capillary/container.hpp"
#include "capillary/trimesh.hpp"

namespace capillary {

struct WettedAreas {
  double area_m = 0.0;              // interface area |M|
  std::vector<double> wetted;       // |B+_i| per facet
  double wetted_total() const;
};

/// Interface area and per-facet wetted area. Planar facets use the shoelace
/// formula on the boundary polygon; the ball uses the geodesic-polygon area
/// on the unit sphere. Negative (inverted) polygons raise BoundaryWinding.
WettedAreas surface_and_wetted_area(const TriMesh& mesh, const Container& container);

/// Divergence-theorem volume of the region bounded by M and the wetted walls.
double enclosed_volume(const TriMesh& mesh, const Container& container);

/// Contact-line length per facet (polyline length of the facet's wall polygons,
/// excluding closing chords along wedge edges).
std::vector<double> contact_line_length(const TriMesh& mesh, const Container& container);

/// Signed wetted area of one closed wall polygon and, optionally, its gradient
/// with respect to the polygon vertices (written into grad, same order).
double wall_polygon_area(const Container& container, int facet, std::span<const Vec3> polygon,
                         std::vector<Vec3>* grad = nullptr);

/// Area of a geodesic polygon on the unit sphere by Gauss-Bonnet
/// (2 pi minus the turning angles), region on the left of the traversal.
double geodesic_polygon_area_gauss_bonnet(std::span<const Vec3> polygon);

/// Checks that every planar wall polygon is simple (no self-intersections).
void check_wall_polygons_simple(const TriMesh& mesh, const Container& container);

struct BoundaryFrame {
  int vertex = -1;
  int facet = -1;
  bool corner = false;        // lies on a wedge edge
  Vec3 tangent;               // along Gamma, induced orientation
  Vec3 conormal;              // mu: tangent to M, outward along Gamma
  Vec3 wall_conormal;         // nu-bar: tangent to the wall, outward from B+
  Vec3 wall_normal;           // N-bar
  double contact_angle = 0.0; // acos(-<nu, N-bar>)
  double normal_curvature = 0.0;  // h(mu, mu)
  double length_weight = 0.0;     // trapezoid weight along Gamma
};

/// Per-vertex discrete differential geometry.
struct VertexGeometry {
  std::vector<double> area;            // mixed Voronoi area
  std::vector<Vec3> normal;            // outward unit normal nu
  std::vector<double> mean_curvature;  // H, cotangent scheme inside, quadric fit on Gamma
  std::vector<double> mean_curvature_fit;  // H from the quadric fit at every vertex
  std::vector<double> shape_norm2;     // |h|^2 from the quadric fit
  std::vector<BoundaryFrame> boundary;
  std::vector<int> boundary_index;     // vertex -> index into boundary, -1 inside
};

VertexGeometry vertex_geometry(const TriMesh& mesh, const Container& container);

/// Mixed Voronoi areas (sum to |M|).
std::vector<double> mixed_voronoi_areas(const TriMesh& mesh);

/// Cotangent weight (cot a + cot b)/2 per topology edge.
std::vector<double> cotan_weights(const TriMesh& mesh);

/// Area-weighted face-normal average at each vertex.
std::vector<Vec3> area_weighted_normals(const TriMesh& mesh);

/// Cotangent Laplacian divided by mixed area; natural (Neumann) at Gamma.
std::vector<double> laplacian_apply(const TriMesh& mesh, std::span<const double> f);

/// Cotangent Laplacian of the coordinate functions, i.e. -H nu at interior vertices.
std::vector<Vec3> laplacian_of_position(const TriMesh& mesh);

struct QuadricFit {
  Vec3 normal;         // fitted unit normal, aligned with the input normal
  Mat3 shape;          // shape operator h as a symmetric map on the tangent plane (world coords)
  double mean_curvature = 0.0;
  double shape_norm2 = 0.0;
};

/// Least-squares quadric over the k-ring (k=2, widened to 3 when fewer than 9 points).
QuadricFit quadric_fit(const TriMesh& mesh, int vertex, const Vec3& normal_guess);

}  // namespace capillary
