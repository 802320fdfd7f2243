#pragma once

#include <cmath>
#include <vector>

#include "capillary/cap_mesh.hpp"
#include "capillary/caps.hpp"
#include "capillary/container.hpp"
#include "capillary/energy.hpp"

namespace fixture {

using namespace capillary;

inline const Vec3 kDown(0.0, 0.0, -1.0);

struct Case {
  Container container;
  CapSolution cap;
};

inline Case half_space_cap(double beta, double radius = 1.0) {
  Container c = Container::half_space(kDown, 0.0, beta);
  return {c, cap_from_radius(c, young_angles(c), radius)};
}

inline Case ball_cap(double beta, double volume) {
  Container c = Container::unit_ball(beta);
  return {c, cap_from_volume(c, young_angles(c), volume)};
}

inline Case ball_disk() { return ball_cap(0.0, 2.0 * M_PI / 3.0); }

/// Orthogonal ball cap with rho = 1, centre at distance sqrt(2) on +z.
inline Case ball_orthogonal(double radius = 1.0) {
  Container c = Container::unit_ball(0.0);
  return {c, cap_from_radius(c, young_angles(c), radius)};
}

/// L = 2 wedge with opening angle 2 and beta = 0; the minimiser is a lune on the edge.
inline Case wedge_lune(double radius = 1.0) {
  Container c = Container::wedge({kDown, Vec3(0.0, -std::sin(2.0), std::cos(2.0))}, {0.0, 0.0});
  return {c, cap_from_radius(c, young_angles(c), radius)};
}

inline TriMesh mesh_of(const Case& k, int faces) {
  return build_cap_mesh(k.container, k.cap, edge_length_for_faces(k.cap, faces));
}

/// Ladders of three meshes growing fourfold up to `finest` faces.
inline std::vector<int> ladder_faces(int finest = 10000) { return {finest / 16, finest / 4, finest}; }

/// Least-squares slope of log|value| against log h.
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& v) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(std::abs(v[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Orthonormal directions a wall vertex may move along, and the curve that
/// keeps it on its wall; interior vertices get the three coordinate axes.
inline std::vector<Vec3> admissible_directions(const TriMesh& m, const Container& c, int v) {
  const FacetMask mask = m.facet_masks()[v];
  if (mask == 0) return {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  if (facet_count_in(mask) == 2) {
    const int f0 = first_facet(mask);
    const int f1 = first_facet(mask & ~(FacetMask{1} << f0));
    return {c.planes()[f0].normal.cross(c.planes()[f1].normal).normalized()};
  }
  const Vec3 n = c.wall_normal(first_facet(mask), m.vertices()[v]);
  const Vec3 e1 = n.unitOrthogonal();
  return {e1, n.cross(e1)};
}

inline Vec3 moved(const Container& c, const Vec3& x, const Vec3& dir, double t) {
  const Vec3 y = x + t * dir;
  return c.kind() == ContainerKind::Ball && std::abs(x.norm() - 1.0) < 1e-12 ? Vec3(y.normalized()) : y;
}

/// Five-point central-difference derivative of `f` along each admissible
/// direction of v, recombined into a vector, next to the analytic gradient
/// restricted the same way.
template <class F>
std::pair<Vec3, Vec3> fd_and_analytic(TriMesh& m, const Container& c, int v, const Vec3& analytic, F&& f,
                                      double step = 1e-4) {
  const Vec3 x0 = m.vertices()[v];
  auto at = [&](const Vec3& d, double t) {
    m.mutable_vertices()[v] = moved(c, x0, d, t);
    const double e = f(m);
    m.mutable_vertices()[v] = x0;
    return e;
  };
  Vec3 fd = Vec3::Zero(), an = Vec3::Zero();
  for (const Vec3& d : admissible_directions(m, c, v)) {
    const double slope = (8.0 * (at(d, step) - at(d, -step)) - (at(d, 2.0 * step) - at(d, -2.0 * step))) / (12.0 * step);
    fd += slope * d;
    an += analytic.dot(d) * d;
  }
  return {fd, an};
}

}  // namespace fixture
