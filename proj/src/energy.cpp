#include "capillary/energy.hpp"

#include <cmath>
#include <sstream>

#include "capillary/error.hpp"
#include "capillary/geometry.hpp"

namespace capillary {

namespace {

// Adds scale * d|B+|/dx for every wall polygon of every facet.
template <class Weight>
void add_wetted_gradient(const TriMesh& mesh, const Container& container, Weight weight, std::vector<Vec3>& g) {
  const auto& x = mesh.vertices();
  const auto& polys = mesh.topology().facet_polygons;
  std::vector<Vec3> pts, grad;
  for (int facet = 0; facet < static_cast<int>(polys.size()); ++facet) {
    const double w = weight(facet);
    if (w == 0.0) continue;
    for (const auto& poly : polys[facet]) {
      pts.clear();
      for (int v : poly) pts.push_back(x[v]);
      wall_polygon_area(container, facet, pts, &grad);
      for (std::size_t k = 0; k < poly.size(); ++k) g[poly[k]] += w * grad[k];
    }
  }
}

}  // namespace

double field_dot(std::span<const Vec3> a, std::span<const Vec3> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

double energy(const TriMesh& mesh, const Container& container, std::span<const double> betas) {
  if (static_cast<int>(betas.size()) != container.facet_count()) {
    throw Error(ErrorKind::InvalidArgument, "one beta per facet is required");
  }
  const WettedAreas a = surface_and_wetted_area(mesh, container);
  double e = a.area_m;
  for (std::size_t i = 0; i < betas.size(); ++i) e -= betas[i] * a.wetted[i];
  return e;
}

void project_to_constraints(const TriMesh& mesh, const Container& container, std::vector<Vec3>& field) {
  const auto& x = mesh.vertices();
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const FacetMask mask = mesh.facet_masks()[v];
    if (mask != 0) field[v] = container.project_tangent(mask, x[v], field[v]);
  }
}

void project_to_normal_motion(const TriMesh& mesh, const Container& container, std::vector<Vec3>& field) {
  const auto& x = mesh.vertices();
  const auto& topo = mesh.topology();
  const auto n = area_weighted_normals(mesh);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const FacetMask mask = mesh.facet_masks()[v];
    if (mask == 0) {
      field[v] = n[v].dot(field[v]) * n[v];
      continue;
    }
    field[v] = container.project_tangent(mask, x[v], field[v]);
    if (facet_count_in(mask) > 1) continue;
    Vec3 t = container.project_tangent(mask, x[v], x[topo.loop_next[v]] - x[topo.loop_prev[v]]);
    const double len = t.norm();
    if (len == 0.0) continue;
    t /= len;
    field[v] -= t.dot(field[v]) * t;
  }
}

std::vector<Vec3> energy_gradient(const TriMesh& mesh, const Container& container, std::span<const double> betas,
                                  bool project) {
  if (static_cast<int>(betas.size()) != container.facet_count()) {
    throw Error(ErrorKind::InvalidArgument, "one beta per facet is required");
  }
  const auto& x = mesh.vertices();
  std::vector<Vec3> g(mesh.vertex_count(), Vec3::Zero());
  for (const Face& f : mesh.faces()) {
    const Vec3 n = (x[f[1]] - x[f[0]]).cross(x[f[2]] - x[f[0]]).normalized();
    for (int k = 0; k < 3; ++k) {
      g[f[k]] += 0.5 * n.cross(x[f[(k + 2) % 3]] - x[f[(k + 1) % 3]]);
    }
  }
  add_wetted_gradient(mesh, container, [&](int facet) { return -betas[facet]; }, g);
  if (project) project_to_constraints(mesh, container, g);
  return g;
}

std::vector<Vec3> volume_gradient(const TriMesh& mesh, const Container& container, bool project) {
  const auto& x = mesh.vertices();
  std::vector<Vec3> g(mesh.vertex_count(), Vec3::Zero());
  for (const Face& f : mesh.faces()) {
    for (int k = 0; k < 3; ++k) g[f[k]] += x[f[(k + 1) % 3]].cross(x[f[(k + 2) % 3]]) / 6.0;
  }
  add_wetted_gradient(mesh, container, [&](int facet) { return container.wall_support(facet) / 3.0; }, g);
  if (project) project_to_constraints(mesh, container, g);
  return g;
}

double volume_project(TriMesh& mesh, const Container& container, double target, double rel_tol,
                      int max_iterations) {
  if (!(target > 0.0)) throw Error(ErrorKind::InvalidArgument, "target volume must be positive");
  double vol = enclosed_volume(mesh, container);
  if (std::abs(vol - target) > 0.2 * target) {
    throw Error(ErrorKind::InvalidArgument, "volume error above 20%; projection is only a local correction");
  }
  const std::vector<Vec3> x0 = mesh.vertices();
  std::vector<Vec3> dir = area_weighted_normals(mesh);
  project_to_normal_motion(mesh, container, dir);

  auto& x = mesh.mutable_vertices();
  auto place = [&](double t) {
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      x[v] = container.retract(mesh.facet_masks()[v], x0[v] + t * dir[v]);
    }
  };
  double t = 0.0;
  for (int it = 0; it <= max_iterations; ++it) {
    if (std::abs(vol - target) <= rel_tol * target) return t;
    if (it == max_iterations) break;
    const auto gv = volume_gradient(mesh, container, false);
    const double slope = field_dot(gv, dir);
    if (!(std::abs(slope) > 0.0)) break;
    t -= (vol - target) / slope;
    place(t);
    vol = enclosed_volume(mesh, container);
  }
  std::ostringstream os;
  os << "volume projection stalled with relative residual " << std::abs(vol - target) / target;
  throw Error(ErrorKind::NoConvergence, os.str());
}

}  // namespace capillary
