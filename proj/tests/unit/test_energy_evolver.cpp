#include <doctest.h>

#include <cmath>
#include <random>

#include "capillary/energy.hpp"
#include "capillary/error.hpp"
#include "capillary/evolver.hpp"
#include "capillary/geometry.hpp"
#include "capillary/identities.hpp"
#include "capillary/sphere_fit.hpp"
#include "fixtures.hpp"

using namespace capillary;

namespace {

EvolveResult evolve_case(const fixture::Case& k, int faces, double amplitude, std::uint64_t seed) {
  TriMesh m = fixture::mesh_of(k, faces);
  perturb_mesh(m, k.container, amplitude, k.cap.flat() ? 1.0 : k.cap.radius, seed);
  EvolveConfig cfg;
  cfg.target_volume = k.cap.volume;
  return evolve(std::move(m), k.container, k.container.betas(), cfg);
}

}  // namespace

TEST_CASE("energy of exact caps") {
  const auto hs = fixture::half_space_cap(0.0);
  const auto c60 = fixture::half_space_cap(0.5);
  const auto disk = fixture::ball_disk();
  CHECK(energy(fixture::mesh_of(hs, 10000), hs.container, hs.container.betas()) ==
        doctest::Approx(2.0 * M_PI).epsilon(2e-3));
  CHECK(energy(fixture::mesh_of(c60, 10000), c60.container, c60.container.betas()) ==
        doctest::Approx(5.0 * M_PI / 8.0).epsilon(2e-3));
  CHECK(energy(fixture::mesh_of(disk, 10000), disk.container, disk.container.betas()) ==
        doctest::Approx(M_PI).epsilon(2e-3));
}

TEST_CASE("energy and volume gradients match central differences") {
  std::mt19937_64 rng(21);
  const fixture::Case cases[] = {fixture::half_space_cap(0.5), fixture::ball_cap(0.5, 0.3), fixture::wedge_lune()};
  for (const auto& k : cases) {
    TriMesh m = fixture::mesh_of(k, 400);
    perturb_mesh(m, k.container, 0.05, k.cap.radius, 4);
    const auto g = energy_gradient(m, k.container, k.container.betas());
    const auto gv = volume_gradient(m, k.container);
    std::uniform_int_distribution<int> pick(0, m.vertex_count() - 1);
    std::vector<int> verts(m.boundary_loops()[0].begin(), m.boundary_loops()[0].begin() + 4);
    for (int i = 0; i < 6; ++i) verts.push_back(pick(rng));
    for (int v : verts) {
      auto [fd, an] = fixture::fd_and_analytic(m, k.container, v, g[v],
                                               [&](const TriMesh& mm) { return energy(mm, k.container, k.container.betas()); });
      CHECK((fd - an).norm() <= 1e-6 * an.norm());
      auto [fdv, anv] = fixture::fd_and_analytic(m, k.container, v, gv[v],
                                                 [&](const TriMesh& mm) { return enclosed_volume(mm, k.container); });
      CHECK((fdv - anv).norm() <= 1e-6 * anv.norm());
    }
  }
}

TEST_CASE("area gradient is the discrete mean-curvature vector times the vertex area") {
  const auto k = fixture::half_space_cap(0.0);
  TriMesh m = fixture::mesh_of(k, 600);
  perturb_mesh(m, k.container, 0.05, 1.0, 8);
  const auto g = energy_gradient(m, k.container, k.container.betas());
  const auto lap = laplacian_of_position(m);
  const auto area = mixed_voronoi_areas(m);
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (m.is_boundary(v)) continue;
    CHECK((g[v] + area[v] * lap[v]).norm() <= 1e-10 * g[v].norm());
  }

  const auto disk = fixture::ball_disk();
  const TriMesh dm = fixture::mesh_of(disk, 600);
  const auto gd = energy_gradient(dm, disk.container, disk.container.betas());
  for (int v = 0; v < dm.vertex_count(); ++v) {
    if (!dm.is_boundary(v)) CHECK(gd[v].norm() < 1e-12);
  }
}

TEST_CASE("stationarity residual of exact caps decreases under refinement") {
  const auto k = fixture::half_space_cap(0.5);
  double prev = 1e300;
  for (int faces : fixture::ladder_faces()) {
    EvolveConfig cfg;
    cfg.target_volume = k.cap.volume;
    cfg.max_iterations = 0;
    const EvolveResult r = evolve(fixture::mesh_of(k, faces), k.container, k.container.betas(), cfg);
    CHECK(r.history[0].grad_norm < prev);
    prev = r.history[0].grad_norm;
  }
}

TEST_CASE("volume projection") {
  const auto hs = fixture::half_space_cap(0.0);
  TriMesh m = fixture::mesh_of(hs, 2500);
  const double v0 = enclosed_volume(m, hs.container);
  CHECK(std::abs(volume_project(m, hs.container, v0)) < 1e-14);

  for (Vec3& x : m.mutable_vertices()) x *= 1.01;
  volume_project(m, hs.container, v0);
  CHECK(enclosed_volume(m, hs.container) == doctest::Approx(v0).epsilon(1e-10));
  // The offset follows area-weighted vertex normals, whose angle error is O(h).
  for (const Vec3& x : m.vertices()) CHECK(std::abs(x.norm() - 1.0) < 2e-5);

  const auto disk = fixture::ball_disk();
  TriMesh d = fixture::mesh_of(disk, 2500);
  for (Vec3& x : d.mutable_vertices()) {
    if (x.norm() < 0.999) x.z() += 0.05 * std::exp(-4.0 * x.squaredNorm());
  }
  volume_project(d, disk.container, 2.0 * M_PI / 3.0);
  CHECK(enclosed_volume(d, disk.container) == doctest::Approx(2.0 * M_PI / 3.0).epsilon(1e-10));
  CHECK_NOTHROW(validate_mesh(d, disk.container));

  try {
    volume_project(m, hs.container, 2.0 * v0);
    FAIL("large volume correction accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("evolve config validation") {
  EvolveConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.target_volume = 1.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.shrink = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.shrink = 0.5;
  cfg.gradient_tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("perturbed hemisphere relaxes to a sphere with lambda = 2") {
  const auto k = fixture::half_space_cap(0.0);
  const EvolveResult r = evolve_case(k, 2500, 0.05, 1);
  CHECK(r.reason == Termination::GradientTolerance);
  CHECK(fit_sphere(r.mesh.vertices()).rms_deviation < 1e-3);
  CHECK(r.lagrange_multiplier == doctest::Approx(2.0).epsilon(0.02));
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i].energy <= r.history[i - 1].energy);
  for (const HistoryRow& h : r.history) CHECK(std::abs(h.volume_error) < 1e-10);
}

TEST_CASE("perturbed 60 degree cap recovers Young's angle") {
  const auto k = fixture::half_space_cap(0.5);
  const EvolveResult r = evolve_case(k, 2500, 0.05, 2);
  CHECK(r.reason == Termination::GradientTolerance);
  const YoungCmc y = young_cmc_deviation(r.mesh, k.container, vertex_geometry(r.mesh, k.container));
  CHECK(y.angle_dev_max * 180.0 / M_PI < 1.0);
}

TEST_CASE("exact minimiser is a fixed point") {
  const auto k = fixture::half_space_cap(0.5);
  EvolveConfig cfg;
  cfg.target_volume = k.cap.volume;
  cfg.gradient_tolerance = 0.05;
  const EvolveResult r = evolve(fixture::mesh_of(k, 2500), k.container, k.container.betas(), cfg);
  CHECK(r.iterations == 0);
  CHECK(r.reason == Termination::GradientTolerance);
}

TEST_CASE("translation parallel to the wall is an equivariance") {
  const auto k = fixture::half_space_cap(0.5);
  TriMesh a = fixture::mesh_of(k, 2500);
  perturb_mesh(a, k.container, 0.05, 1.0, 3);
  TriMesh b = a;
  for (Vec3& x : b.mutable_vertices()) x += Vec3(0.5, 0.25, 0.0);
  EvolveConfig cfg;
  cfg.target_volume = k.cap.volume;
  const EvolveResult ra = evolve(std::move(a), k.container, k.container.betas(), cfg);
  const EvolveResult rb = evolve(std::move(b), k.container, k.container.betas(), cfg);
  CHECK(std::abs(ra.history.back().energy - rb.history.back().energy) <= 1e-12 * ra.history.back().energy);
  CHECK(ra.iterations == rb.iterations);
}

// The converged mesh sits O(h^2) off the sphere (sphericity converges at order
// ~2), and pointwise curvature fits amplify that by 1/h^2. Measured orders on
// this ladder: Young angle ~0.85, fitted-H CMC deviation ~0.5.
TEST_CASE("stationarity implies CMC and Young's law, improving under refinement") {
  const auto k = fixture::half_space_cap(0.5);
  std::vector<double> h, angle, cmc, rms;
  for (int faces : fixture::ladder_faces()) {
    const EvolveResult r = evolve_case(k, faces, 0.05, 5);
    REQUIRE(r.reason == Termination::GradientTolerance);
    const YoungCmc y = young_cmc_deviation(r.mesh, k.container, vertex_geometry(r.mesh, k.container));
    h.push_back(r.mesh.max_edge_length());
    angle.push_back(y.angle_dev_max);
    cmc.push_back(y.cmc_rel_stdev);
    rms.push_back(fit_sphere(r.mesh.vertices()).rms_deviation);
  }
  for (int l = 1; l < 3; ++l) {
    CHECK(angle[l] < angle[l - 1]);
    CHECK(cmc[l] < cmc[l - 1]);
  }
  CHECK(fixture::fitted_order(h, angle) >= 0.75);
  CHECK(fixture::fitted_order(h, cmc) >= 0.4);
  CHECK(fixture::fitted_order(h, rms) >= 2.0);
}
