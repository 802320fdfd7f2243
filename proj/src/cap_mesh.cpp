#include "capillary/cap_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "capillary/error.hpp"
#include "capillary/geometry.hpp"

namespace capillary {

namespace {

void tangent_basis(const Vec3& axis, Vec3& e1, Vec3& e2) {
  const Vec3 seed = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  e1 = (seed - seed.dot(axis) * axis).normalized();
  e2 = axis.cross(e1);
}

// Joins ring a to ring b (each a closed cycle of vertex ids with increasing angle).
void zip(const std::vector<int>& a, double off_a, const std::vector<int>& b, double off_b, std::vector<Face>& faces) {
  const int ma = static_cast<int>(a.size());
  const int mb = static_cast<int>(b.size());
  auto angle_a = [&](int j) { return off_a + 2.0 * M_PI * j / ma; };
  auto angle_b = [&](int j) { return off_b + 2.0 * M_PI * j / mb; };
  int ia = 0, ib = 0;
  while (ia < ma || ib < mb) {
    const bool advance_a = ib >= mb || (ia < ma && angle_a(ia + 1) < angle_b(ib + 1));
    if (advance_a) {
      faces.push_back({a[ia % ma], a[(ia + 1) % ma], b[ib % mb]});
      ++ia;
    } else {
      faces.push_back({a[ia % ma], b[(ib + 1) % mb], b[ib % mb]});
      ++ib;
    }
  }
}

// Orients every face so its normal agrees with the exact outward normal.
void orient_faces(const std::vector<Vec3>& x, std::vector<Face>& faces, const CapSolution& cap) {
  for (Face& f : faces) {
    const Vec3 n = (x[f[1]] - x[f[0]]).cross(x[f[2]] - x[f[0]]);
    const Vec3 centroid = (x[f[0]] + x[f[1]] + x[f[2]]) / 3.0;
    const Vec3 outward = cap.flat() ? cap.axis : Vec3(centroid - cap.center);
    if (n.dot(outward) < 0.0) std::swap(f[1], f[2]);
  }
}

TriMesh ring_mesh(const Container& container, const CapSolution& cap, double edge) {
  Vec3 e1, e2;
  tangent_basis(cap.axis, e1, e2);
  const bool flat = cap.flat();
  const double extent = flat ? 1.0 : cap.polar_extent;
  const double arc = flat ? 1.0 : cap.radius * cap.polar_extent;
  auto ring_radius = [&](double s) { return flat ? s : cap.radius * std::sin(s); };
  auto point = [&](double s, double psi) -> Vec3 {
    const Vec3 dir = std::cos(psi) * e1 + std::sin(psi) * e2;
    if (flat) return cap.center + s * dir;
    return cap.center + cap.radius * (std::cos(s) * cap.axis + std::sin(s) * dir);
  };

  const int boundary_count = static_cast<int>(std::lround(2.0 * M_PI * ring_radius(extent) / edge));
  if (boundary_count < 6) {
    throw Error(ErrorKind::MeshTooCoarse, "edge length too coarse for a closed contact loop of 6 vertices");
  }
  const int rings = std::max(2, static_cast<int>(std::ceil(arc / edge)));

  std::vector<Vec3> x{point(0.0, 0.0)};
  std::vector<Face> faces;
  std::vector<int> prev_ring{0};
  double prev_off = 0.0;
  for (int i = 1; i <= rings; ++i) {
    const double s = extent * i / rings;
    // Ring i carries 6i vertices: every interior vertex has valence 6, which keeps
    // the cotangent operators pointwise consistent.
    const int m = 6 * i;
    const double off = 0.0;
    std::vector<int> ring(m);
    for (int j = 0; j < m; ++j) {
      Vec3 p = point(s, off + 2.0 * M_PI * j / m);
      if (i == rings) p = container.retract(FacetMask{1}, p);
      ring[j] = static_cast<int>(x.size());
      x.push_back(p);
    }
    if (i == 1) {
      for (int j = 0; j < m; ++j) faces.push_back({0, ring[j], ring[(j + 1) % m]});
    } else {
      zip(prev_ring, prev_off, ring, off, faces);
    }
    prev_ring = std::move(ring);
    prev_off = off;
  }
  orient_faces(x, faces, cap);
  return TriMesh::build(std::move(x), std::move(faces), container);
}

TriMesh lune_mesh(const Container& container, const CapSolution& cap, double edge) {
  const Vec3& n1 = container.planes()[0].normal;
  const Vec3& n2 = container.planes()[1].normal;
  const Vec3 e = n1.cross(n2).normalized();
  Vec3 m1 = e.cross(n1).normalized();
  if (m1.dot(n2) > 0.0) m1 = -m1;
  Vec3 m2 = e.cross(n2).normalized();
  if (m2.dot(n1) > 0.0) m2 = -m2;
  const Vec3 mid = cap.axis;

  const double longest = cap.radius * M_PI / 2.0;
  const int levels = std::max(1, static_cast<int>(std::ceil(std::log2(longest / edge))));
  if ((1 << levels) * 2 < 6) throw Error(ErrorKind::MeshTooCoarse, "edge length too coarse for a lune");

  std::vector<Vec3> dir{e, -e, m1, m2, mid};
  std::vector<Face> faces{{0, 2, 4}, {0, 4, 3}, {1, 4, 2}, {1, 3, 4}};
  for (int level = 0; level < levels; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto split = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int id = static_cast<int>(dir.size());
      dir.push_back((dir[a] + dir[b]).normalized());
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int a = split(f[0], f[1]), b = split(f[1], f[2]), c = split(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({a, f[1], b});
      next.push_back({c, b, f[2]});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }
  std::vector<Vec3> x(dir.size());
  for (std::size_t i = 0; i < dir.size(); ++i) {
    x[i] = cap.center + cap.radius * dir[i];
    const FacetMask mask = container.facets_at(x[i], 1e-9 * cap.radius);
    if (mask != 0) x[i] = container.retract(mask, x[i]);
  }
  orient_faces(x, faces, cap);
  return TriMesh::build(std::move(x), std::move(faces), container);
}

}  // namespace

TriMesh build_cap_mesh(const Container& container, const CapSolution& cap, double target_edge_length) {
  if (!(target_edge_length > 0.0)) throw Error(ErrorKind::InvalidArgument, "target edge length must be positive");
  if (cap.container_kind != container.kind()) {
    throw Error(ErrorKind::WrongContainer, "cap was constructed for a different container kind");
  }
  TriMesh mesh = cap.shape == CapShape::Lune ? lune_mesh(container, cap, target_edge_length)
                                             : ring_mesh(container, cap, target_edge_length);
  const double tol = 1e-9 * std::max(1.0, cap.radius);
  for (const Vec3& p : mesh.vertices()) {
    if (!container.contains(p, tol)) throw Error(ErrorKind::CapOutsideContainer, "cap leaves the container");
  }
  return mesh;
}

double edge_length_for_faces(const CapSolution& cap, int faces) {
  if (faces < 4) throw Error(ErrorKind::InvalidArgument, "face count too small");
  if (cap.shape == CapShape::Lune) {
    const int levels = std::max(1, static_cast<int>(std::lround(std::log(faces / 4.0) / std::log(4.0))));
    // Slightly above the subdivision threshold so rounding cannot add a level.
    return 1.001 * cap.radius * M_PI / 2.0 / std::pow(2.0, levels);
  }
  const double arc = cap.flat() ? 1.0 : cap.radius * cap.polar_extent;
  const int rings = std::max(2, static_cast<int>(std::lround(std::sqrt(faces / 6.0))));
  return arc / (rings - 0.001);
}

TriMesh mirror_close(const TriMesh& mesh, const Container& container, int facet) {
  if (!container.is_planar()) throw Error(ErrorKind::WrongContainer, "mirroring needs a planar facet");
  const Plane& plane = container.planes().at(facet);
  const int nv = mesh.vertex_count();
  std::vector<Vec3> x = mesh.vertices();
  std::vector<int> image(nv);
  for (int v = 0; v < nv; ++v) {
    if (mesh.is_boundary(v)) {
      if (mesh.facet_masks()[v] != (FacetMask{1} << facet)) {
        throw Error(ErrorKind::InvalidArgument, "mirroring requires the whole boundary on one facet");
      }
      image[v] = v;
    } else {
      image[v] = static_cast<int>(x.size());
      const Vec3& p = mesh.vertices()[v];
      x.push_back(p - 2.0 * (plane.normal.dot(p) - plane.offset) * plane.normal);
    }
  }
  std::vector<Face> faces = mesh.faces();
  for (const Face& f : mesh.faces()) faces.push_back({image[f[0]], image[f[2]], image[f[1]]});
  return TriMesh::build(std::move(x), std::move(faces), container);
}

void perturb_mesh(TriMesh& mesh, const Container& container, double amplitude, double length_scale,
                  std::uint64_t seed) {
  if (amplitude < 0.0 || amplitude > 0.2) throw Error(ErrorKind::InvalidArgument, "amplitude must lie in [0, 0.2]");
  if (amplitude == 0.0) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  struct Mode {
    Vec3 k;
    double phase, weight;
  };
  std::vector<Mode> modes(8);
  for (Mode& m : modes) {
    Vec3 d(uni(rng), uni(rng), uni(rng));
    while (d.norm() < 1e-3) d = Vec3(uni(rng), uni(rng), uni(rng));
    const double freq = 2.0 + 1.5 * uni(rng);
    m.k = freq * d.normalized() / length_scale;
    m.phase = M_PI * uni(rng);
    m.weight = uni(rng);
  }
  auto& x = mesh.mutable_vertices();
  std::vector<double> f(x.size(), 0.0);
  double peak = 0.0;
  for (std::size_t v = 0; v < x.size(); ++v) {
    for (const Mode& m : modes) f[v] += m.weight * std::sin(m.k.dot(x[v]) + m.phase);
    peak = std::max(peak, std::abs(f[v]));
  }
  if (peak == 0.0) return;
  const auto normals = area_weighted_normals(mesh);
  // The wall-normal part of the displacement fades out smoothly towards each
  // wall, so wall vertices and their neighbours move consistently.
  const double band = 0.25 * length_scale;
  for (std::size_t v = 0; v < x.size(); ++v) {
    Vec3 d = amplitude * length_scale * f[v] / peak * normals[v];
    for (int i = 0; i < container.facet_count(); ++i) {
      const double s = std::max(0.0, -container.wall_distance(i, x[v])) / band;
      const Vec3 n = container.wall_normal(i, x[v]);
      d -= std::exp(-s * s) * d.dot(n) * n;
    }
    const FacetMask mask = mesh.facet_masks()[v];
    if (mask != 0) {
      d = container.project_tangent(mask, x[v], d);
      x[v] = container.retract(mask, x[v] + d);
    } else {
      x[v] += d;
    }
  }
  validate_mesh(mesh, container);
}

}  // namespace capillary
