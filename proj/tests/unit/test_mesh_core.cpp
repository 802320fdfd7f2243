#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "capillary/error.hpp"
#include "capillary/geometry.hpp"
#include "capillary/mesh_io.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace capillary;
using fixture::kDown;

namespace {

// Frozen oracle values (closed-form cap integrals, see oracles.cpp).
constexpr double kHalfBall = 2.0943951023931953;    // 2 pi / 3
constexpr double kCap60Volume = 0.6544984694978736;  // 5 pi / 24

TriMesh hemisphere(double edge) {
  const auto k = fixture::half_space_cap(0.0);
  return build_cap_mesh(k.container, k.cap, edge);
}

}  // namespace

TEST_CASE("container rejects inadmissible betas and dependent normals") {
  CHECK_THROWS_AS(Container::half_space(kDown, 0.0, 1.0), Error);
  CHECK_THROWS_AS(Container::unit_ball(-1.2), Error);
  CHECK_THROWS_AS(Container::half_space(Vec3(0.0, 0.0, -2.0), 0.0, 0.0), Error);
  try {
    Container::wedge({kDown, Vec3(0.0, 0.0, 1.0)}, {0.0, 0.0});
    FAIL("dependent normals accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularGram);
  }
}

TEST_CASE("ball wall curvature is the identity form") {
  const Container b = Container::unit_ball(0.0);
  CHECK(b.wall_curvature() == 1.0);
  CHECK(Container::half_space(kDown, 0.0, 0.0).wall_curvature() == 0.0);
  const Vec3 x = Vec3(1.0, 2.0, 2.0) / 3.0;
  CHECK((b.wall_normal(0, x) - x).norm() < 1e-15);
}

TEST_CASE("exact hemisphere sampling") {
  const TriMesh m = hemisphere(0.1);
  for (int v = 0; v < m.vertex_count(); ++v) CHECK(std::abs(m.vertices()[v].norm() - 1.0) < 1e-12);
  REQUIRE(m.boundary_loops().size() == 1);
  for (int v : m.boundary_loops()[0]) CHECK(std::abs(m.vertices()[v].z()) < 1e-12);
  CHECK(m.loop_facet(0) == 0);
}

TEST_CASE("equatorial disk sampling in the ball") {
  const auto k = fixture::ball_disk();
  REQUIRE(k.cap.flat());
  const TriMesh m = build_cap_mesh(k.container, k.cap, 0.1);
  for (const Vec3& x : m.vertices()) CHECK(std::abs(x.dot(k.cap.axis)) < 1e-12);
  for (int v : m.boundary_loops()[0]) CHECK(std::abs(m.vertices()[v].norm() - 1.0) < 1e-12);
}

TEST_CASE("60 degree cap wetted radius") {
  const auto k = fixture::half_space_cap(0.5);
  const TriMesh m = build_cap_mesh(k.container, k.cap, 0.05);
  for (int v : m.boundary_loops()[0]) {
    const Vec3& x = m.vertices()[v];
    CHECK(std::hypot(x.x(), x.y()) == doctest::Approx(std::sin(M_PI / 3.0)).epsilon(1e-12));
  }
}

TEST_CASE("build_cap_mesh errors") {
  const auto k = fixture::half_space_cap(0.0);
  try {
    build_cap_mesh(k.container, k.cap, 5.0);
    FAIL("coarse mesh accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MeshTooCoarse);
  }
  const Container shifted = Container::half_space(kDown, -0.5, 0.0);
  try {
    build_cap_mesh(shifted, k.cap, 0.1);
    FAIL("cap outside the container accepted");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::CapOutsideContainer || e.kind() == ErrorKind::InvalidMesh));
  }
}

TEST_CASE("enclosed volume against closed form and Monte Carlo") {
  const auto hs = fixture::half_space_cap(0.0);
  const auto c60 = fixture::half_space_cap(0.5);
  CHECK(oracle::cap_volume(1.0, M_PI / 2.0) == doctest::Approx(kHalfBall).epsilon(1e-15));
  CHECK(oracle::cap_volume(1.0, M_PI / 3.0) == doctest::Approx(kCap60Volume).epsilon(1e-15));

  const Vec3 c = c60.cap.center;
  const auto mc = oracle::monte_carlo_volume([&](const Vec3& x) { return x.z() >= 0.0 && (x - c).norm() <= 1.0; },
                                             Vec3(-1, -1, 0), Vec3(1, 1, 1), 400000, 7);
  CHECK(std::abs(mc.value - kCap60Volume) < 4.0 * mc.stderr_);

  std::vector<double> h, err;
  for (int faces : fixture::ladder_faces()) {
    const TriMesh m = fixture::mesh_of(c60, faces);
    h.push_back(m.max_edge_length());
    err.push_back(std::abs(enclosed_volume(m, c60.container) - kCap60Volume));
  }
  CHECK(err.back() < 1e-3);
  CHECK(fixture::fitted_order(h, err) >= 1.0);

  const TriMesh hm = fixture::mesh_of(hs, 10000);
  CHECK(enclosed_volume(hm, hs.container) == doctest::Approx(kHalfBall).epsilon(2e-3));
  const auto disk = fixture::ball_disk();
  const TriMesh dm = fixture::mesh_of(disk, 10000);
  CHECK(enclosed_volume(dm, disk.container) == doctest::Approx(kHalfBall).epsilon(2e-3));
}

TEST_CASE("surface and wetted areas") {
  struct Row {
    fixture::Case k;
    double area, wetted;
  };
  const Row rows[] = {
      {fixture::half_space_cap(0.0), 2.0 * M_PI, M_PI},
      {fixture::half_space_cap(0.5), M_PI, 0.75 * M_PI},
      {fixture::ball_disk(), M_PI, 2.0 * M_PI},
  };
  for (const Row& r : rows) {
    const TriMesh m = fixture::mesh_of(r.k, 10000);
    const WettedAreas w = surface_and_wetted_area(m, r.k.container);
    CHECK(w.area_m == doctest::Approx(r.area).epsilon(2e-3));
    CHECK(w.wetted_total() == doctest::Approx(r.wetted).epsilon(2e-3));
  }
}

TEST_CASE("ball wetted area agrees with the Gauss-Bonnet turning-angle area") {
  const auto k = fixture::ball_cap(0.5, 0.3);
  const TriMesh m = fixture::mesh_of(k, 2500);
  std::vector<Vec3> poly;
  // The facet polygon keeps B+ on its right as seen from outside the ball.
  for (int v : m.topology().facet_polygons[0][0]) poly.insert(poly.begin(), m.vertices()[v]);
  const double gb = geodesic_polygon_area_gauss_bonnet(poly);
  CHECK(surface_and_wetted_area(m, k.container).wetted[0] == doctest::Approx(gb).epsilon(1e-10));
}

TEST_CASE("vertex geometry on exact caps") {
  const auto hs = fixture::half_space_cap(0.0);
  const TriMesh m = fixture::mesh_of(hs, 2500);
  const VertexGeometry g = vertex_geometry(m, hs.container);
  for (int v = 0; v < m.vertex_count(); ++v) {
    CHECK(std::abs(g.normal[v].norm() - 1.0) < 1e-10);
    CHECK(g.mean_curvature_fit[v] == doctest::Approx(2.0).epsilon(1e-2));
  }
  for (const BoundaryFrame& f : g.boundary) {
    CHECK(std::abs(f.conormal.norm() - 1.0) < 1e-10);
    CHECK(std::abs(f.conormal.dot(g.normal[f.vertex])) < 1e-10);
  }

  const auto c60 = fixture::half_space_cap(0.5);
  const TriMesh m60 = fixture::mesh_of(c60, 2500);
  const VertexGeometry g60 = vertex_geometry(m60, c60.container);
  for (const BoundaryFrame& f : g60.boundary) {
    CHECK(f.contact_angle * 180.0 / M_PI == doctest::Approx(60.0).epsilon(5e-3));
    CHECK(f.normal_curvature == doctest::Approx(1.0).epsilon(5e-2));
  }

  const auto disk = fixture::ball_disk();
  const TriMesh md = fixture::mesh_of(disk, 2500);
  const VertexGeometry gd = vertex_geometry(md, disk.container);
  for (int v = 0; v < md.vertex_count(); ++v) {
    CHECK(std::abs(gd.mean_curvature[v]) < 1e-9);
    CHECK(std::abs(gd.shape_norm2[v]) < 1e-9);
  }
}

// The cotangent H is only consistent in L2 on the ring mesher (valence seams),
// so it is measured as an area-weighted RMS; the quadric H in max norm.
TEST_CASE("mean curvature, area and Cauchy-Schwarz defect converge on the 60 degree cap") {
  const auto k = fixture::half_space_cap(0.5);
  std::vector<double> h, cot_rms, fit_max, a_err, cs;
  for (int faces : fixture::ladder_faces()) {
    const TriMesh m = fixture::mesh_of(k, faces);
    const VertexGeometry g = vertex_geometry(m, k.container);
    double worst = 0.0, cs_min = 0.0, s = 0.0, area = 0.0;
    for (int v = 0; v < m.vertex_count(); ++v) {
      worst = std::max(worst, std::abs(g.mean_curvature_fit[v] - 2.0));
      if (!m.is_boundary(v)) {
        s += g.area[v] * (g.mean_curvature[v] - 2.0) * (g.mean_curvature[v] - 2.0);
        area += g.area[v];
      }
      cs_min = std::min(cs_min, 2.0 * g.shape_norm2[v] - g.mean_curvature_fit[v] * g.mean_curvature_fit[v]);
    }
    h.push_back(m.max_edge_length());
    fit_max.push_back(worst);
    cot_rms.push_back(std::sqrt(s / area));
    a_err.push_back(std::abs(surface_and_wetted_area(m, k.container).area_m - oracle::cap_area(1.0, M_PI / 3.0)));
    cs.push_back(-cs_min);
  }
  CHECK(fixture::fitted_order(h, cot_rms) >= 0.9);
  CHECK(fixture::fitted_order(h, fit_max) >= 1.0);
  CHECK(fixture::fitted_order(h, a_err) >= 1.0);
  CHECK(cs[2] <= cs[0]);
  CHECK(cs[2] < 1e-6);
}

TEST_CASE("laplacian annihilates constants and planar linear functions") {
  const auto disk = fixture::ball_disk();
  const TriMesh m = fixture::mesh_of(disk, 2500);
  std::vector<double> one(m.vertex_count(), 3.5), lin(m.vertex_count());
  const Vec3 a(0.3, -1.2, 0.7);
  for (int v = 0; v < m.vertex_count(); ++v) lin[v] = m.vertices()[v].dot(a);
  const auto l1 = laplacian_apply(m, one);
  const auto l2 = laplacian_apply(m, lin);
  for (int v = 0; v < m.vertex_count(); ++v) {
    CHECK(std::abs(l1[v]) < 1e-10);
    if (!m.is_boundary(v)) CHECK(std::abs(l2[v]) < 1e-10);
  }
}

TEST_CASE("closed polyhedron volume and orientation audits") {
  const auto hs = fixture::half_space_cap(0.0);
  const TriMesh closed = mirror_close(fixture::mesh_of(hs, 2500), hs.container);
  CHECK(closed.boundary_loops().empty());
  double v6 = 0.0;
  Vec3 area_vector = Vec3::Zero();
  const auto& x = closed.vertices();
  for (const Face& f : closed.faces()) {
    v6 += x[f[0]].dot(x[f[1]].cross(x[f[2]]));
    area_vector += (x[f[1]] - x[f[0]]).cross(x[f[2]] - x[f[0]]);
  }
  CHECK(std::abs(enclosed_volume(closed, hs.container) - v6 / 6.0) < 1e-12);
  CHECK(area_vector.norm() < 1e-10);
}

TEST_CASE("mesh invariants are enforced at construction") {
  const Container c = Container::half_space(kDown, 0.0, 0.0);
  const std::vector<Vec3> tet = {Vec3(0, 0, 0.2), Vec3(1, 0, 0.2), Vec3(0, 1, 0.2), Vec3(0, 0, 1.2)};
  CHECK_NOTHROW(TriMesh::build(tet, {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}}, c));
  try {
    TriMesh::build(tet, {{0, 2, 1}, {0, 3, 1}, {1, 2, 3}, {0, 3, 2}}, c);
    FAIL("inconsistent orientation accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidMesh);
  }
  try {
    TriMesh::build({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0.1)}, {{0, 1, 2}}, c);
    FAIL("boundary off the wall accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidMesh);
  }
  try {
    TriMesh::build({Vec3(0, 0, 0.5), Vec3(1, 0, 0.5), Vec3(2, 0, 0.5), Vec3(0, 0, 1.5)},
                   {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}}, c);
    FAIL("degenerate face accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidMesh);
  }
}

TEST_CASE("OFF and OBJ round trip") {
  const auto k = fixture::wedge_lune();
  const TriMesh m = fixture::mesh_of(k, 256);
  const auto dir = std::filesystem::temp_directory_path() / "capillary_io_test";
  std::filesystem::create_directories(dir);
  for (const char* name : {"m.off", "m.obj"}) {
    const std::string path = (dir / name).string();
    if (std::string(name).ends_with(".off")) {
      write_off(path, m);
    } else {
      write_obj(path, m);
    }
    MeshData d = read_mesh(path);
    REQUIRE(d.faces == m.faces());
    double worst = 0.0;
    for (int v = 0; v < m.vertex_count(); ++v) worst = std::max(worst, (d.vertices[v] - m.vertices()[v]).norm());
    CHECK(worst < 1e-15);
    const TriMesh back = TriMesh::build(std::move(d.vertices), std::move(d.faces), k.container);
    CHECK(back.facet_masks() == m.facet_masks());
  }
  CHECK_THROWS_AS(read_mesh((dir / "missing.off").string()), Error);
  CHECK_THROWS_AS(read_mesh((dir / "m.ply").string()), Error);
}
