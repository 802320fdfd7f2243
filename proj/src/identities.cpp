#include "capillary/identities.hpp"

#include <cmath>

#include "capillary/error.hpp"

namespace capillary {

void ResidualReport::add(std::string name, double value, std::string scale) {
  residuals.push_back({std::move(name), value, std::move(scale)});
}

double ResidualReport::get(const std::string& name) const {
  for (const auto& r : residuals) {
    if (r.name == name) return r.value;
  }
  throw Error(ErrorKind::InvalidArgument, "no residual named " + name);
}

namespace {

double total_area(const VertexGeometry& geom) {
  double a = 0.0;
  for (double x : geom.area) a += x;
  return a;
}

void require_planar_through_origin(const Container& container) {
  if (!container.is_planar()) {
    throw Error(ErrorKind::WrongContainer, "the wedge Minkowski formula needs planar facets");
  }
  for (const Plane& p : container.planes()) {
    if (std::abs(p.offset) > 1e-14) {
      throw Error(ErrorKind::WrongContainer, "the wedge Minkowski formula needs facets through the origin");
    }
  }
}

}  // namespace

double minkowski_residual_wedge(const TriMesh& mesh, const Container& container, const VertexGeometry& geom,
                                const WedgeVector& k) {
  require_planar_through_origin(container);
  const auto& x = mesh.vertices();
  double s = 0.0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3& nu = geom.normal[v];
    s += geom.area[v] * (2.0 - geom.mean_curvature[v] * x[v].dot(nu) + 2.0 * k.k.dot(nu));
  }
  return std::abs(s) / total_area(geom);
}

double minkowski_residual_ball(const TriMesh& mesh, const Container& container, const VertexGeometry& geom) {
  if (container.kind() != ContainerKind::Ball) {
    throw Error(ErrorKind::WrongContainer, "the ball Minkowski formula needs the unit ball");
  }
  const double cos_theta = container.beta(0);
  const auto& x = mesh.vertices();
  double worst = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const Vec3 a = Vec3::Unit(axis);
    double s = 0.0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const Vec3& nu = geom.normal[v];
      const Vec3 xa = x[v].dot(a) * x[v] - 0.5 * (x[v].squaredNorm() + 1.0) * a;
      s += geom.area[v] * (2.0 * (x[v] + cos_theta * nu).dot(a) - geom.mean_curvature[v] * xa.dot(nu));
    }
    worst = std::max(worst, std::abs(s));
  }
  return worst / total_area(geom);
}

Balancing balancing_residual(const TriMesh& mesh, const Container& container, const VertexGeometry& geom) {
  Balancing b;
  double area = 0.0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    b.mean_curvature += geom.area[v] * geom.mean_curvature_fit[v];
    area += geom.area[v];
  }
  b.mean_curvature /= area;
  const double h = b.mean_curvature;
  b.absolute = std::abs(h) * std::sqrt(area) < 1e-6;
  const WettedAreas wet = surface_and_wetted_area(mesh, container);
  const auto len = contact_line_length(mesh, container);

  if (container.is_planar()) {
    for (int f = 0; f < container.facet_count(); ++f) {
      const double lhs = h * wet.wetted[f];
      const double rhs = std::sqrt(1.0 - container.beta(f) * container.beta(f)) * len[f];
      b.lhs.push_back(lhs);
      b.rhs.push_back(rhs);
      b.residual.push_back(b.absolute || lhs == 0.0 ? std::abs(lhs - rhs) : std::abs(lhs - rhs) / std::abs(lhs));
    }
    return b;
  }

  // Unit ball: compare vectors, then report scalar magnitudes along the mismatch scale.
  const auto& x = mesh.vertices();
  Vec3 vector_area = Vec3::Zero();
  for (const auto& poly : mesh.topology().facet_polygons[0]) {
    const int n = static_cast<int>(poly.size());
    for (int k = 0; k < n; ++k) vector_area -= 0.5 * x[poly[k]].cross(x[poly[(k + 1) % n]]);
  }
  Vec3 mu_integral = Vec3::Zero();
  for (const BoundaryFrame& f : geom.boundary) mu_integral += f.length_weight * f.conormal;
  const Vec3 lhs = h * vector_area;
  b.lhs.push_back(lhs.norm());
  b.rhs.push_back(mu_integral.norm());
  const double defect = (lhs - mu_integral).norm();
  b.residual.push_back(b.absolute ? defect / len[0] : defect / (std::abs(h) * wet.wetted[0]));
  return b;
}

YoungCmc young_cmc_deviation(const TriMesh& mesh, const Container& container, const VertexGeometry& geom) {
  YoungCmc out;
  for (const BoundaryFrame& f : geom.boundary) {
    if (f.corner) continue;
    const double target = std::acos(container.beta(f.facet));
    out.angle_dev_max = std::max(out.angle_dev_max, std::abs(f.contact_angle - target));
  }
  double s = 0.0, s2 = 0.0, area = 0.0;
  int n = 0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    area += geom.area[v];
    if (mesh.is_boundary(v)) continue;
    const double h = geom.mean_curvature_fit[v];
    s += h;
    s2 += h * h;
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::InvalidMesh, "mesh has no interior vertices");
  const double mean = s / n;
  const double stdev = std::sqrt(std::max(0.0, s2 / n - mean * mean));
  out.mean_curvature = mean;
  out.flat = std::abs(mean) * std::sqrt(area) < 1e-3;
  out.cmc_rel_stdev = out.flat ? stdev * std::sqrt(area) : stdev / std::abs(mean);
  return out;
}

AmbientField AmbientField::constant(const Vec3& a) {
  AmbientField f;
  f.kind = Kind::Constant;
  f.a = a;
  return f;
}

AmbientField AmbientField::linear(const Mat3& m) {
  AmbientField f;
  f.kind = Kind::Linear;
  f.m = m;
  return f;
}

AmbientField AmbientField::position() {
  AmbientField f;
  f.kind = Kind::Position;
  return f;
}

AmbientField AmbientField::conformal_killing(const Vec3& a) {
  AmbientField f;
  f.kind = Kind::ConformalKilling;
  f.a = a;
  return f;
}

Vec3 AmbientField::value(const Vec3& x) const {
  switch (kind) {
    case Kind::Constant: return a;
    case Kind::Linear: return m * x;
    case Kind::Position: return x;
    case Kind::ConformalKilling: return x.dot(a) * x - 0.5 * (x.squaredNorm() + 1.0) * a;
  }
  return Vec3::Zero();
}

Mat3 AmbientField::jacobian(const Vec3& x) const {
  switch (kind) {
    case Kind::Constant: return Mat3::Zero();
    case Kind::Linear: return m;
    case Kind::Position: return Mat3::Identity();
    case Kind::ConformalKilling: return x * a.transpose() + x.dot(a) * Mat3::Identity() - a * x.transpose();
  }
  return Mat3::Zero();
}

double divergence_residual(const TriMesh& mesh, const VertexGeometry& geom, const AmbientField& field) {
  const auto& x = mesh.vertices();
  double lhs = 0.0, rhs = 0.0, area = 0.0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3& nu = geom.normal[v];
    const Mat3 j = field.jacobian(x[v]);
    lhs += geom.area[v] * (j.trace() - nu.dot(j * nu));
    rhs += geom.area[v] * geom.mean_curvature[v] * field.value(x[v]).dot(nu);
    area += geom.area[v];
  }
  for (const BoundaryFrame& f : geom.boundary) rhs += f.length_weight * field.value(x[f.vertex]).dot(f.conormal);
  return std::abs(lhs - rhs) / area;
}

Vec3 flux_identity_defect(const TriMesh& mesh, const VertexGeometry& geom) {
  const auto& x = mesh.vertices();
  Vec3 d = Vec3::Zero();
  for (int v = 0; v < mesh.vertex_count(); ++v) d += 2.0 * geom.area[v] * geom.normal[v];
  for (const BoundaryFrame& f : geom.boundary) {
    const Vec3& p = x[f.vertex];
    const Vec3& nu = geom.normal[f.vertex];
    d -= f.length_weight * (p.dot(f.conormal) * nu - p.dot(nu) * f.conormal);
  }
  return d;
}

double flux_identity_residual(const TriMesh& mesh, const VertexGeometry& geom) {
  return flux_identity_defect(mesh, geom).norm() / total_area(geom);
}

std::vector<Vec3> vertex_gradients(const TriMesh& mesh, const std::vector<double>& f) {
  const auto& x = mesh.vertices();
  std::vector<Vec3> grad(mesh.vertex_count(), Vec3::Zero());
  std::vector<double> weight(mesh.vertex_count(), 0.0);
  for (const Face& face : mesh.faces()) {
    const Vec3 area_vec = (x[face[1]] - x[face[0]]).cross(x[face[2]] - x[face[0]]);
    const double twice_area = area_vec.norm();
    const Vec3 n = area_vec / twice_area;
    Vec3 g = Vec3::Zero();
    for (int k = 0; k < 3; ++k) g += f[face[k]] * n.cross(x[face[(k + 2) % 3]] - x[face[(k + 1) % 3]]);
    g /= twice_area;
    for (int k = 0; k < 3; ++k) {
      grad[face[k]] += 0.5 * twice_area * g;
      weight[face[k]] += 0.5 * twice_area;
    }
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) grad[v] /= weight[v];
  return grad;
}

PointwiseDefects pointwise_defects(const TriMesh& mesh, const Container& container, const CapSolution& cap,
                                   const Vec3& a) {
  const int nv = mesh.vertex_count();
  const auto& x = mesh.vertices();
  const bool ball = container.kind() == ContainerKind::Ball;
  const Vec3 k = ball ? Vec3::Zero() : wedge_k(container).k;
  const double h = cap.mean_curvature();
  const double h2 = cap.flat() ? 0.0 : 2.0 / (cap.radius * cap.radius);

  std::vector<double> zeta(nv), phi_w(nv), phi_a(nv), phi_b(nv), xnu(nv), xa(nv);
  PointwiseDefects out;
  for (int v = 0; v < nv; ++v) {
    const FieldSample s = sample_fields(cap, k, a, x[v], 1e-8);
    zeta[v] = s.zeta;
    phi_w[v] = s.phi_wedge;
    phi_a[v] = s.phi_a;
    phi_b[v] = s.phi_ball;
    xnu[v] = x[v].dot(s.normal);
    xa[v] = x[v].dot(a);
    if (ball) {
      out.phi_ball_sup = std::max(out.phi_ball_sup, std::abs(s.phi_ball));
    } else {
      out.zeta_sup = std::max(out.zeta_sup, std::abs(s.zeta));
    }
  }
  const auto area = mixed_voronoi_areas(mesh);
  auto l2 = [&](const std::vector<double>& f, auto rhs) {
    const auto lap = laplacian_apply(mesh, f);
    double s = 0.0, w = 0.0;
    for (int v = 0; v < nv; ++v) {
      if (mesh.is_boundary(v)) continue;
      const double e = lap[v] - rhs(v);
      s += area[v] * e * e;
      w += area[v];
    }
    return std::sqrt(s / w);
  };

  const VertexGeometry exact = exact_vertex_fields(mesh, container, cap);
  auto robin = [&](const std::vector<double>& f) {
    const auto grad = vertex_gradients(mesh, f);
    double worst = 0.0;
    for (const BoundaryFrame& b : exact.boundary) {
      if (b.corner) continue;
      const double q = sample_q(cap, container, x[b.vertex], 1e-8);
      worst = std::max(worst, std::abs(grad[b.vertex].dot(b.conormal) - q * f[b.vertex]));
    }
    return worst;
  };

  if (ball) {
    out.phi_a_l2 = l2(phi_a, [&](int v) { return -h2 * phi_a[v] + (2.0 * h2 - h * h) * xa[v]; });
    out.phi_ball_l2 = l2(phi_b, [&](int v) { return (2.0 * h2 - h * h) * xnu[v]; });
    out.phi_a_robin_max = robin(phi_a);
    for (const BoundaryFrame& b : exact.boundary) {
      out.phi_ball_boundary_max = std::max(out.phi_ball_boundary_max, std::abs(phi_b[b.vertex]));
    }
  } else {
    out.zeta_l2 = l2(zeta, [&](int v) { return -h * h - h2 * (zeta[v] - 2.0); });
    out.phi_wedge_l2 = l2(phi_w, [&](int v) { return 2.0 * (h2 - 0.5 * h * h) * xnu[v]; });
    out.zeta_robin_max = robin(zeta);
  }
  return out;
}

}  // namespace capillary
