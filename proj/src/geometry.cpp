#include "capillary/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "capillary/error.hpp"

namespace capillary {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

double cot_at(const Vec3& apex, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - apex;
  const Vec3 w = q - apex;
  return u.dot(w) / u.cross(w).norm();
}

// Signed solid angle of the spherical triangle (a, b, c) of unit vectors and
// its partial derivatives with respect to b and c.
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c, Vec3* db, Vec3* dc) {
  const double num = a.dot(b.cross(c));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  if (db != nullptr) {
    const double s = 2.0 / (num * num + den * den);
    *db = s * (den * c.cross(a) - num * (a + c));
    *dc = s * (den * a.cross(b) - num * (a + b));
  }
  return 2.0 * std::atan2(num, den);
}

void orthonormal_frame(const Vec3& n, Vec3& t1, Vec3& t2) {
  const Vec3 seed = std::abs(n.x()) < 0.6 ? Vec3::UnitX() : (std::abs(n.y()) < 0.6 ? Vec3::UnitY() : Vec3::UnitZ());
  t1 = (seed - seed.dot(n) * n).normalized();
  t2 = n.cross(t1);
}

std::vector<int> k_ring(const TriMesh& mesh, int v, int depth) {
  const auto& nb = mesh.topology().neighbors;
  std::vector<int> ring{v};
  std::vector<int> frontier{v};
  for (int d = 0; d < depth; ++d) {
    std::vector<int> next;
    for (int u : frontier) {
      for (int w : nb[u]) {
        if (std::find(ring.begin(), ring.end(), w) == ring.end()) {
          ring.push_back(w);
          next.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  ring.erase(ring.begin());
  return ring;
}

struct GraphFit {
  double du, dv;      // gradient of the height function
  Eigen::Matrix2d hess;
};

GraphFit fit_height(const std::vector<Vec3>& x, const std::vector<int>& ring, const Vec3& origin, const Vec3& t1,
                    const Vec3& t2, const Vec3& n) {
  Eigen::MatrixXd a(ring.size(), 5);
  Eigen::VectorXd rhs(ring.size());
  for (std::size_t r = 0; r < ring.size(); ++r) {
    const Vec3 d = x[ring[r]] - origin;
    const double u = d.dot(t1);
    const double v = d.dot(t2);
    a.row(r) << 0.5 * u * u, u * v, 0.5 * v * v, u, v;
    rhs(r) = d.dot(n);
  }
  // Column scaling keeps the quadratic and linear unknowns comparably conditioned.
  Eigen::VectorXd scale = a.colwise().norm().transpose();
  for (int c = 0; c < 5; ++c) {
    if (scale(c) == 0.0) scale(c) = 1.0;
  }
  const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
  const Eigen::VectorXd sol = as.colPivHouseholderQr().solve(rhs).cwiseQuotient(scale);
  GraphFit g;
  g.hess << sol(0), sol(1), sol(1), sol(2);
  g.du = sol(3);
  g.dv = sol(4);
  return g;
}

}  // namespace

double WettedAreas::wetted_total() const { return std::accumulate(wetted.begin(), wetted.end(), 0.0); }

double wall_polygon_area(const Container& container, int facet, std::span<const Vec3> polygon,
                         std::vector<Vec3>* grad) {
  const int n = static_cast<int>(polygon.size());
  if (grad != nullptr) grad->assign(n, Vec3::Zero());
  if (container.is_planar()) {
    const Vec3& nbar = container.planes().at(facet).normal;
    Vec3 acc = Vec3::Zero();
    for (int k = 0; k < n; ++k) acc += polygon[k].cross(polygon[(k + 1) % n]);
    if (grad != nullptr) {
      for (int k = 0; k < n; ++k) {
        (*grad)[k] = 0.5 * nbar.cross(polygon[(k + 1) % n] - polygon[(k + n - 1) % n]);
      }
    }
    return -0.5 * acc.dot(nbar);
  }

  // Unit sphere: fan of signed solid angles from a pole g. The wetted region lies
  // to the right of the M-oriented loop, hence the overall minus sign.
  std::vector<Vec3> unit(n);
  Vec3 pole = Vec3::Zero();
  Vec3 mean = Vec3::Zero();
  for (int k = 0; k < n; ++k) unit[k] = polygon[k].normalized();
  for (int k = 0; k < n; ++k) {
    pole += unit[k].cross(unit[(k + 1) % n]);
    mean += unit[k];
  }
  if (pole.norm() < 1e-300) pole = mean;
  pole.normalize();
  if (pole.dot(mean) < 0.0) pole = -pole;

  double total = 0.0;
  std::vector<Vec3> dunit(grad != nullptr ? n : 0, Vec3::Zero());
  for (int k = 0; k < n; ++k) {
    const int k1 = (k + 1) % n;
    Vec3 db, dc;
    total -= solid_angle(pole, unit[k], unit[k1], grad != nullptr ? &db : nullptr, &dc);
    if (grad != nullptr) {
      dunit[k] -= db;
      dunit[k1] -= dc;
    }
  }
  if (total < 0.0) total += kFourPi;
  if (grad != nullptr) {
    for (int k = 0; k < n; ++k) {
      const double r = polygon[k].norm();
      (*grad)[k] = (dunit[k] - unit[k].dot(dunit[k]) * unit[k]) / r;
    }
  }
  return total;
}

double geodesic_polygon_area_gauss_bonnet(std::span<const Vec3> polygon) {
  const int n = static_cast<int>(polygon.size());
  double turning = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec3 p = polygon[k].normalized();
    const Vec3 prev = polygon[(k + n - 1) % n].normalized();
    const Vec3 next = polygon[(k + 1) % n].normalized();
    const Vec3 din = -(prev - prev.dot(p) * p).normalized();
    const Vec3 dout = (next - next.dot(p) * p).normalized();
    turning += std::atan2(p.dot(din.cross(dout)), din.dot(dout));
  }
  return 2.0 * M_PI - turning;
}

WettedAreas surface_and_wetted_area(const TriMesh& mesh, const Container& container) {
  WettedAreas out;
  const auto& x = mesh.vertices();
  for (const Face& f : mesh.faces()) {
    out.area_m += 0.5 * (x[f[1]] - x[f[0]]).cross(x[f[2]] - x[f[0]]).norm();
  }
  out.wetted.assign(container.facet_count(), 0.0);
  const auto& polys = mesh.topology().facet_polygons;
  std::vector<Vec3> pts;
  for (int facet = 0; facet < static_cast<int>(polys.size()); ++facet) {
    for (const auto& poly : polys[facet]) {
      pts.clear();
      for (int v : poly) pts.push_back(x[v]);
      const double a = wall_polygon_area(container, facet, pts);
      if (!(a > 0.0)) {
        throw Error(ErrorKind::BoundaryWinding, "wall polygon has non-positive area; the contact line winds backwards");
      }
      out.wetted[facet] += a;
    }
  }
  return out;
}

double enclosed_volume(const TriMesh& mesh, const Container& container) {
  const auto& x = mesh.vertices();
  double six_v = 0.0;
  for (const Face& f : mesh.faces()) six_v += x[f[0]].dot(x[f[1]].cross(x[f[2]]));
  double wall = 0.0;
  const auto& polys = mesh.topology().facet_polygons;
  std::vector<Vec3> pts;
  for (int facet = 0; facet < static_cast<int>(polys.size()); ++facet) {
    const double support = container.wall_support(facet);
    if (support == 0.0) continue;
    for (const auto& poly : polys[facet]) {
      pts.clear();
      for (int v : poly) pts.push_back(x[v]);
      wall += support * wall_polygon_area(container, facet, pts);
    }
  }
  return six_v / 6.0 + wall / 3.0;
}

std::vector<double> contact_line_length(const TriMesh& mesh, const Container& container) {
  std::vector<double> len(container.facet_count(), 0.0);
  const auto& x = mesh.vertices();
  const auto& polys = mesh.topology().facet_polygons;
  for (int facet = 0; facet < static_cast<int>(polys.size()); ++facet) {
    for (const auto& poly : polys[facet]) {
      const int n = static_cast<int>(poly.size());
      // A chain closed by a wedge-edge chord has first and last vertex on the edge.
      const bool chain = facet_count_in(mesh.facet_masks()[poly.front()]) > 1 &&
                         facet_count_in(mesh.facet_masks()[poly.back()]) > 1 &&
                         mesh.topology().loop_next[poly.back()] != poly.front();
      const int segments = chain ? n - 1 : n;
      for (int k = 0; k < segments; ++k) len[facet] += (x[poly[(k + 1) % n]] - x[poly[k]]).norm();
    }
  }
  return len;
}

void check_wall_polygons_simple(const TriMesh& mesh, const Container& container) {
  if (!container.is_planar()) return;
  const auto& x = mesh.vertices();
  const auto& polys = mesh.topology().facet_polygons;
  for (int facet = 0; facet < static_cast<int>(polys.size()); ++facet) {
    Vec3 t1, t2;
    orthonormal_frame(container.planes()[facet].normal, t1, t2);
    for (const auto& poly : polys[facet]) {
      const int n = static_cast<int>(poly.size());
      std::vector<Eigen::Vector2d> p(n);
      for (int k = 0; k < n; ++k) p[k] = {x[poly[k]].dot(t1), x[poly[k]].dot(t2)};
      auto orient = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
        return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
      };
      for (int i = 0; i < n; ++i) {
        for (int j = i + 2; j < n; ++j) {
          if (i == 0 && j == n - 1) continue;
          const auto &a = p[i], &b = p[(i + 1) % n], &c = p[j], &d = p[(j + 1) % n];
          const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
          if (o1 * o2 < 0.0 && o3 * o4 < 0.0) {
            throw Error(ErrorKind::BoundaryWinding, "contact line self-intersects on its wall");
          }
        }
      }
    }
  }
}

std::vector<double> mixed_voronoi_areas(const TriMesh& mesh) {
  const auto& x = mesh.vertices();
  std::vector<double> area(mesh.vertex_count(), 0.0);
  for (const Face& f : mesh.faces()) {
    const double fa = 0.5 * (x[f[1]] - x[f[0]]).cross(x[f[2]] - x[f[0]]).norm();
    int obtuse = -1;
    for (int k = 0; k < 3; ++k) {
      if ((x[f[(k + 1) % 3]] - x[f[k]]).dot(x[f[(k + 2) % 3]] - x[f[k]]) < 0.0) obtuse = k;
    }
    if (obtuse >= 0) {
      for (int k = 0; k < 3; ++k) area[f[k]] += (k == obtuse ? 0.5 : 0.25) * fa;
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      const int i = f[k], j = f[(k + 1) % 3], l = f[(k + 2) % 3];
      const double cot_l = cot_at(x[l], x[i], x[j]);
      const double cot_j = cot_at(x[j], x[l], x[i]);
      area[i] += 0.125 * ((x[i] - x[j]).squaredNorm() * cot_l + (x[i] - x[l]).squaredNorm() * cot_j);
    }
  }
  return area;
}

std::vector<double> cotan_weights(const TriMesh& mesh) {
  const auto& x = mesh.vertices();
  const auto& topo = mesh.topology();
  std::vector<double> w(topo.edges.size(), 0.0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& fc = mesh.faces()[f];
    for (int k = 0; k < 3; ++k) {
      w[topo.face_edges[f][k]] += 0.5 * cot_at(x[fc[k]], x[fc[(k + 1) % 3]], x[fc[(k + 2) % 3]]);
    }
  }
  return w;
}

std::vector<Vec3> area_weighted_normals(const TriMesh& mesh) {
  const auto& x = mesh.vertices();
  std::vector<Vec3> n(mesh.vertex_count(), Vec3::Zero());
  for (const Face& f : mesh.faces()) {
    const Vec3 a = (x[f[1]] - x[f[0]]).cross(x[f[2]] - x[f[0]]);
    for (int k = 0; k < 3; ++k) n[f[k]] += a;
  }
  for (auto& v : n) v.normalize();
  return n;
}

std::vector<double> laplacian_apply(const TriMesh& mesh, std::span<const double> f) {
  if (static_cast<int>(f.size()) != mesh.vertex_count()) {
    throw Error(ErrorKind::InvalidArgument, "field size does not match vertex count");
  }
  const auto w = cotan_weights(mesh);
  const auto area = mixed_voronoi_areas(mesh);
  std::vector<double> out(mesh.vertex_count(), 0.0);
  const auto& edges = mesh.topology().edges;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double d = w[e] * (f[edges[e].b] - f[edges[e].a]);
    out[edges[e].a] += d;
    out[edges[e].b] -= d;
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) out[v] /= area[v];
  return out;
}

std::vector<Vec3> laplacian_of_position(const TriMesh& mesh) {
  const auto& x = mesh.vertices();
  const auto w = cotan_weights(mesh);
  const auto area = mixed_voronoi_areas(mesh);
  std::vector<Vec3> out(mesh.vertex_count(), Vec3::Zero());
  const auto& edges = mesh.topology().edges;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Vec3 d = w[e] * (x[edges[e].b] - x[edges[e].a]);
    out[edges[e].a] += d;
    out[edges[e].b] -= d;
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) out[v] /= area[v];
  return out;
}

QuadricFit quadric_fit(const TriMesh& mesh, int vertex, const Vec3& normal_guess) {
  const auto& x = mesh.vertices();
  std::vector<int> ring = k_ring(mesh, vertex, 2);
  if (ring.size() < 9) ring = k_ring(mesh, vertex, 3);
  if (ring.size() < 5) throw Error(ErrorKind::DegenerateVertex, "too few neighbours for a quadric fit");

  Vec3 n = normal_guess.normalized();
  Vec3 t1, t2;
  GraphFit g{};
  // Second pass re-centres the frame on the fitted normal so the gradient terms are small.
  for (int pass = 0; pass < 2; ++pass) {
    orthonormal_frame(n, t1, t2);
    g = fit_height(x, ring, x[vertex], t1, t2, n);
    n = (n - g.du * t1 - g.dv * t2).normalized();
  }
  orthonormal_frame(n, t1, t2);
  g = fit_height(x, ring, x[vertex], t1, t2, n);

  const double w = std::sqrt(1.0 + g.du * g.du + g.dv * g.dv);
  Eigen::Matrix2d first;
  first << 1.0 + g.du * g.du, g.du * g.dv, g.du * g.dv, 1.0 + g.dv * g.dv;
  const Eigen::Matrix2d second = -g.hess / w;  // h = -Hess w.r.t. the outward normal
  const Eigen::Matrix2d weingarten = first.inverse() * second;

  QuadricFit out;
  out.normal = (n - g.du * t1 - g.dv * t2).normalized();
  out.mean_curvature = weingarten.trace();
  out.shape_norm2 = (weingarten * weingarten).trace();
  Eigen::Matrix<double, 3, 2> frame;
  frame.col(0) = t1;
  frame.col(1) = t2;
  out.shape = frame * second * frame.transpose();
  return out;
}

VertexGeometry vertex_geometry(const TriMesh& mesh, const Container& container) {
  const int nv = mesh.vertex_count();
  const auto& x = mesh.vertices();
  const auto& topo = mesh.topology();
  VertexGeometry g;
  g.area = mixed_voronoi_areas(mesh);
  g.normal = area_weighted_normals(mesh);
  g.mean_curvature.assign(nv, 0.0);
  g.mean_curvature_fit.assign(nv, 0.0);
  g.shape_norm2.assign(nv, 0.0);
  g.boundary_index.assign(nv, -1);
  const auto lap = laplacian_of_position(mesh);

  for (int v = 0; v < nv; ++v) {
    if (mesh.is_boundary(v)) {
      const bool needle = std::all_of(topo.neighbors[v].begin(), topo.neighbors[v].end(),
                                      [&](int u) { return mesh.is_boundary(u); });
      if (needle) throw Error(ErrorKind::DegenerateVertex, "boundary vertex with an all-boundary 1-ring");
    }
    const QuadricFit fit = quadric_fit(mesh, v, g.normal[v]);
    g.normal[v] = fit.normal;
    g.shape_norm2[v] = fit.shape_norm2;
    g.mean_curvature_fit[v] = fit.mean_curvature;
    g.mean_curvature[v] = mesh.is_boundary(v) ? fit.mean_curvature : -lap[v].dot(fit.normal);

    if (!mesh.is_boundary(v)) continue;
    BoundaryFrame b;
    b.vertex = v;
    const FacetMask mask = mesh.facet_masks()[v];
    b.corner = facet_count_in(mask) > 1;
    b.facet = first_facet(mask);
    const int prev = topo.loop_prev[v];
    const int next = topo.loop_next[v];
    if (b.corner) {
      // Attribute a wedge-edge vertex to the facet of its outgoing contact-line edge.
      b.facet = first_facet(mask & mesh.facet_masks()[next]);
    }
    b.tangent = (x[next] - x[prev]).normalized();
    b.conormal = b.tangent.cross(fit.normal).normalized();
    b.wall_normal = container.wall_normal(b.facet, x[v]);
    b.wall_conormal = b.wall_normal.cross(b.tangent).normalized();
    b.contact_angle = std::acos(std::clamp(-fit.normal.dot(b.wall_normal), -1.0, 1.0));
    b.normal_curvature = b.conormal.dot(fit.shape * b.conormal);
    b.length_weight = 0.5 * ((x[v] - x[prev]).norm() + (x[next] - x[v]).norm());
    g.boundary_index[v] = static_cast<int>(g.boundary.size());
    g.boundary.push_back(b);
  }
  return g;
}

}  // namespace capillary
