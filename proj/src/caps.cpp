#include "capillary/caps.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>
#include <Eigen/Dense>

#include "capillary/error.hpp"

namespace capillary {

namespace {

double cap_volume_half_space(double rho, double theta) {
  const double c = std::cos(theta);
  return M_PI / 3.0 * rho * rho * rho * (1.0 - c) * (1.0 - c) * (2.0 + c);
}

// Dihedral opening of a two-plane wedge.
double wedge_opening(const Container& container) {
  const auto& p = container.planes();
  return M_PI - std::acos(std::clamp(p[0].normal.dot(p[1].normal), -1.0, 1.0));
}

struct BallGeometry {
  double d;        // |center|
  double z_gamma;  // height of the contact circle along the center direction
  double cos_polar;
};

BallGeometry ball_geometry(double rho, double theta) {
  BallGeometry g;
  g.d = std::sqrt(1.0 + rho * rho + 2.0 * rho * std::cos(theta));
  g.z_gamma = (1.0 + rho * std::cos(theta)) / g.d;
  g.cos_polar = std::clamp((rho + std::cos(theta)) / g.d, -1.0, 1.0);
  return g;
}

double ball_cap_volume(double rho, double theta) {
  const BallGeometry g = ball_geometry(rho, theta);
  const double h1 = rho * (1.0 - g.cos_polar);
  const double h2 = 1.0 - g.z_gamma;
  return M_PI * h1 * h1 * (3.0 * rho - h1) / 3.0 + M_PI * h2 * h2 * (3.0 - h2) / 3.0;
}

void check_angles(const Container& container, std::span<const double> angles) {
  if (static_cast<int>(angles.size()) != container.facet_count()) {
    throw Error(ErrorKind::InvalidArgument, "one contact angle per facet is required");
  }
  for (double t : angles) {
    if (!(t > 0.0 && t < M_PI)) throw Error(ErrorKind::InvalidArgument, "contact angles must lie in (0, pi)");
  }
}

bool is_right_angle(double t) { return std::abs(t - M_PI / 2.0) < 1e-12; }

CapSolution half_space_cap(const Plane& plane, double theta, double rho, ContainerKind kind) {
  CapSolution cap;
  cap.container_kind = kind;
  cap.shape = CapShape::SphericalCap;
  cap.radius = rho;
  cap.center = (plane.offset + rho * std::cos(theta)) * plane.normal;
  cap.axis = -plane.normal;
  cap.polar_extent = theta;
  cap.contact_angles = {theta};
  cap.volume = cap_volume_half_space(rho, theta);
  return cap;
}

CapSolution lune(const Container& container, double rho) {
  const auto& p = container.planes();
  CapSolution cap;
  cap.container_kind = ContainerKind::Wedge;
  cap.shape = CapShape::Lune;
  cap.radius = rho;
  cap.center = Vec3::Zero();
  cap.axis = -(p[0].normal + p[1].normal).normalized();
  cap.polar_extent = wedge_opening(container) / 2.0;
  cap.contact_angles = {M_PI / 2.0, M_PI / 2.0};
  cap.volume = 2.0 * wedge_opening(container) / 3.0 * rho * rho * rho;
  return cap;
}

[[noreturn]] void wedge_infeasible(const Container& container) {
  const WedgeVector k = wedge_k(container);
  std::ostringstream os;
  if (k.norm >= 1.0 - 1e-12) {
    os << "wedge with |k| = " << k.norm << " >= 1 admits no spherical cap inside the wedge";
  } else {
    os << "wedge caps are constructed only for two facets with beta = 0 (|k| = " << k.norm << ")";
  }
  throw Error(ErrorKind::Infeasible, os.str());
}

}  // namespace

WedgeVector wedge_k(const Container& container) {
  if (!container.is_planar()) throw Error(ErrorKind::WrongContainer, "k is defined for half-spaces and wedges");
  container.validate();
  const auto& planes = container.planes();
  const int l = container.facet_count();
  Eigen::MatrixXd gram(l, l);
  Eigen::VectorXd beta(l);
  for (int i = 0; i < l; ++i) {
    beta(i) = container.beta(i);
    for (int j = 0; j < l; ++j) gram(i, j) = planes[i].normal.dot(planes[j].normal);
  }
  const Eigen::VectorXd c = gram.ldlt().solve(beta);
  WedgeVector w;
  w.coefficients.assign(c.data(), c.data() + l);
  for (int i = 0; i < l; ++i) w.k += c(i) * planes[i].normal;
  w.norm = w.k.norm();
  return w;
}

std::vector<double> young_angles(const Container& container) {
  std::vector<double> t;
  for (double b : container.betas()) t.push_back(std::acos(b));
  return t;
}

CapSolution cap_from_radius(const Container& container, std::span<const double> facet_angles, double radius) {
  check_angles(container, facet_angles);
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
  switch (container.kind()) {
    case ContainerKind::HalfSpace:
      return half_space_cap(container.planes()[0], facet_angles[0], radius, ContainerKind::HalfSpace);
    case ContainerKind::Wedge:
      if (container.facet_count() == 1) {
        return half_space_cap(container.planes()[0], facet_angles[0], radius, ContainerKind::Wedge);
      }
      if (container.facet_count() == 2 && is_right_angle(facet_angles[0]) && is_right_angle(facet_angles[1])) {
        return lune(container, radius);
      }
      wedge_infeasible(container);
    case ContainerKind::Ball: {
      const double theta = facet_angles[0];
      const BallGeometry g = ball_geometry(radius, theta);
      CapSolution cap;
      cap.container_kind = ContainerKind::Ball;
      cap.shape = CapShape::SphericalCap;
      cap.radius = radius;
      cap.center = g.d * Vec3::UnitZ();
      cap.axis = -Vec3::UnitZ();
      cap.polar_extent = std::acos(g.cos_polar);
      cap.contact_angles = {theta};
      cap.volume = ball_cap_volume(radius, theta);
      return cap;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown container");
}

CapSolution cap_from_volume(const Container& container, std::span<const double> facet_angles, double volume) {
  check_angles(container, facet_angles);
  if (!(volume > 0.0)) throw Error(ErrorKind::InvalidArgument, "volume must be positive");
  if (container.kind() != ContainerKind::Ball) {
    // Planar caps scale as rho^3, so the inversion is a cube root of the unit-radius volume.
    const CapSolution unit = cap_from_radius(container, facet_angles, 1.0);
    return cap_from_radius(container, facet_angles, std::cbrt(volume / unit.volume));
  }

  const double theta = facet_angles[0];
  if (volume >= 4.0 * M_PI / 3.0) throw Error(ErrorKind::Infeasible, "volume exceeds the unit ball");
  if (is_right_angle(theta) && std::abs(volume - 2.0 * M_PI / 3.0) < 1e-12) {
    CapSolution disk;
    disk.container_kind = ContainerKind::Ball;
    disk.shape = CapShape::FlatDisk;
    disk.radius = 1.0;
    disk.axis = Vec3::UnitZ();
    disk.contact_angles = {theta};
    disk.volume = 2.0 * M_PI / 3.0;
    return disk;
  }
  constexpr double lo = 1e-6, hi = 1e3;
  double prev = ball_cap_volume(lo, theta);
  for (int i = 1; i <= 64; ++i) {
    const double v = ball_cap_volume(lo * std::pow(hi / lo, i / 64.0), theta);
    if (!(v > prev)) throw Error(ErrorKind::Infeasible, "ball cap volume is not monotone in the radius");
    prev = v;
  }
  auto f = [&](double rho) { return ball_cap_volume(rho, theta) - volume; };
  if (!(f(lo) < 0.0 && f(hi) > 0.0)) {
    std::ostringstream os;
    os << "no ball cap at theta = " << theta << " encloses volume " << volume << " (range up to "
       << ball_cap_volume(hi, theta) << ")";
    throw Error(ErrorKind::Infeasible, os.str());
  }
  std::uintmax_t iters = 200;
  const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::abs(a); };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  if (iters >= 200) throw Error(ErrorKind::NoConvergence, "cap radius root finding did not converge");
  return cap_from_radius(container, facet_angles, 0.5 * (r.first + r.second));
}

double CapQuantities::wetted_total() const { return std::accumulate(wetted.begin(), wetted.end(), 0.0); }
double CapQuantities::length_total() const {
  return std::accumulate(contact_length.begin(), contact_length.end(), 0.0);
}

CapQuantities cap_quantities(const CapSolution& cap, std::span<const double> betas) {
  CapQuantities q;
  const double rho = cap.radius;
  q.mean_curvature = cap.mean_curvature();
  q.volume = cap.volume;
  switch (cap.shape) {
    case CapShape::FlatDisk:
      q.area_m = M_PI;
      q.wetted = {2.0 * M_PI};
      q.contact_length = {2.0 * M_PI};
      break;
    case CapShape::Lune: {
      const double opening = 2.0 * cap.polar_extent;
      q.area_m = 2.0 * opening * rho * rho;
      q.wetted = {M_PI * rho * rho / 2.0, M_PI * rho * rho / 2.0};
      q.contact_length = {M_PI * rho, M_PI * rho};
      break;
    }
    case CapShape::SphericalCap: {
      q.area_m = 2.0 * M_PI * rho * rho * (1.0 - std::cos(cap.polar_extent));
      if (cap.container_kind == ContainerKind::Ball) {
        const BallGeometry g = ball_geometry(rho, cap.contact_angles[0]);
        q.wetted = {2.0 * M_PI * (1.0 - g.z_gamma)};
        q.contact_length = {2.0 * M_PI * std::sqrt(std::max(0.0, 1.0 - g.z_gamma * g.z_gamma))};
      } else {
        const double s = std::sin(cap.contact_angles[0]);
        q.wetted = {M_PI * rho * rho * s * s};
        q.contact_length = {2.0 * M_PI * rho * s};
      }
      break;
    }
  }
  if (betas.size() != q.wetted.size()) throw Error(ErrorKind::InvalidArgument, "one beta per facet is required");
  q.energy = q.area_m;
  for (std::size_t i = 0; i < betas.size(); ++i) q.energy -= betas[i] * q.wetted[i];
  return q;
}

namespace {

Vec3 exact_normal(const CapSolution& cap, const Vec3& x, double tol) {
  if (cap.flat()) {
    if (std::abs(cap.axis.dot(x - cap.center)) > tol) {
      throw Error(ErrorKind::InvalidArgument, "point is not on the disk");
    }
    return cap.axis;
  }
  const Vec3 r = x - cap.center;
  if (std::abs(r.norm() - cap.radius) > tol * std::max(1.0, cap.radius)) {
    throw Error(ErrorKind::InvalidArgument, "point is not on the cap sphere");
  }
  return r.normalized();
}

}  // namespace

FieldSample sample_fields(const CapSolution& cap, const Vec3& k, const Vec3& a, const Vec3& x, double tol) {
  FieldSample s;
  s.normal = exact_normal(cap, x, tol);
  s.mean_curvature = cap.mean_curvature();
  s.shape_norm2 = cap.flat() ? 0.0 : 2.0 / (cap.radius * cap.radius);
  const double h = s.mean_curvature;
  const double xn = x.dot(s.normal);
  const double x2 = x.squaredNorm();
  const double cos_theta = std::cos(cap.contact_angles.at(0));
  s.zeta = 2.0 - h * xn + 2.0 * k.dot(s.normal);
  s.phi_wedge = 0.5 * h * x2 - 2.0 * xn;
  s.x_a = x.dot(a) * x - 0.5 * (x2 + 1.0) * a;
  s.phi_a = 2.0 * (x + cos_theta * s.normal).dot(a) - h * s.x_a.dot(s.normal);
  s.phi_ball = 0.5 * (x2 - 1.0) * h - 2.0 * (xn + cos_theta);
  return s;
}

double sample_q(const CapSolution& cap, const Container& container, const Vec3& x, double tol) {
  exact_normal(cap, x, tol);
  const FacetMask mask = container.facets_at(x, tol);
  if (mask == 0) throw Error(ErrorKind::NotOnBoundary, "q is defined only on the contact line");
  const double theta = cap.contact_angles.at(first_facet(mask));
  const double h_mu = cap.flat() ? 0.0 : 1.0 / cap.radius;
  return container.wall_curvature() / std::sin(theta) + h_mu * std::cos(theta) / std::sin(theta);
}

VertexGeometry exact_vertex_fields(const TriMesh& mesh, const Container& container, const CapSolution& cap) {
  const int nv = mesh.vertex_count();
  const auto& x = mesh.vertices();
  const auto& topo = mesh.topology();
  VertexGeometry g;
  g.area = mixed_voronoi_areas(mesh);
  g.normal.resize(nv);
  g.mean_curvature.assign(nv, cap.mean_curvature());
  g.mean_curvature_fit = g.mean_curvature;
  g.shape_norm2.assign(nv, cap.flat() ? 0.0 : 2.0 / (cap.radius * cap.radius));
  g.boundary_index.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    g.normal[v] = exact_normal(cap, x[v], 1e-8);
    if (!mesh.is_boundary(v)) continue;
    BoundaryFrame b;
    b.vertex = v;
    const FacetMask mask = mesh.facet_masks()[v];
    const int prev = topo.loop_prev[v];
    const int next = topo.loop_next[v];
    b.corner = facet_count_in(mask) > 1;
    b.facet = b.corner ? first_facet(mask & mesh.facet_masks()[next]) : first_facet(mask);
    b.wall_normal = container.wall_normal(b.facet, x[v]);
    const Vec3& nu = g.normal[v];
    b.conormal = (b.wall_normal - b.wall_normal.dot(nu) * nu).normalized();
    b.tangent = nu.cross(b.conormal);
    b.wall_conormal = b.wall_normal.cross(b.tangent).normalized();
    b.contact_angle = std::acos(std::clamp(-nu.dot(b.wall_normal), -1.0, 1.0));
    b.normal_curvature = cap.flat() ? 0.0 : 1.0 / cap.radius;
    b.length_weight = 0.5 * ((x[v] - x[prev]).norm() + (x[next] - x[v]).norm());
    g.boundary_index[v] = static_cast<int>(g.boundary.size());
    g.boundary.push_back(b);
  }
  return g;
}

}  // namespace capillary
