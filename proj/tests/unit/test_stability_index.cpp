#include <doctest.h>

#include <cmath>

#include "capillary/error.hpp"
#include "capillary/geometry.hpp"
#include "capillary/stability.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace capillary;

namespace {

IndexForm form_of(const TriMesh& m, const fixture::Case& k) {
  return assemble_index_form(m, k.container, k.container.betas());
}

Eigen::VectorXd sample(const TriMesh& m, auto f) {
  Eigen::VectorXd z(m.vertex_count());
  for (int v = 0; v < m.vertex_count(); ++v) z[v] = f(m.vertices()[v]);
  return z;
}

double max_abs(const std::vector<double>& v) {
  double w = 0.0;
  for (double x : v) w = std::max(w, std::abs(x));
  return w;
}

}  // namespace

TEST_CASE("Robin coefficient branches") {
  const auto hs = fixture::half_space_cap(0.0);
  const TriMesh hm = fixture::mesh_of(hs, 2500);
  const VertexGeometry hg = vertex_geometry(hm, hs.container);
  const QCoefficient q0 = q_coefficient(hm, hs.container, hg, hs.container.betas());
  CHECK(q0.branch == QBranch::Wedge);
  CHECK(max_abs(q0.q) < 1e-12);

  const auto c60 = fixture::half_space_cap(0.5);
  const TriMesh cm = fixture::mesh_of(c60, 2500);
  const QCoefficient q60 = q_coefficient(cm, c60.container, vertex_geometry(cm, c60.container), c60.container.betas());
  for (double q : q60.q) CHECK(q == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(0.02));

  const auto disk = fixture::ball_disk();
  const TriMesh dm = fixture::mesh_of(disk, 2500);
  const QCoefficient qd = q_coefficient(dm, disk.container, vertex_geometry(dm, disk.container), disk.container.betas());
  CHECK(qd.branch == QBranch::Ball);
  for (double q : qd.q) CHECK(q == doctest::Approx(1.0).epsilon(1e-10));

  const double grazing[] = {std::cos(5e-4)};
  try {
    q_coefficient(hm, hs.container, hg, grazing);
    FAIL("grazing contact angle accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllConditioned);
  }
}

TEST_CASE("index form matrices") {
  const auto c60 = fixture::half_space_cap(0.5);
  const TriMesh m = fixture::mesh_of(c60, 400);
  const IndexForm f = form_of(m, c60);
  const SparseMatrix k = f.operator_matrix();
  CHECK((SparseMatrix(k.transpose()) - k).norm() < 1e-12 * k.norm());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.vertex_count());
  CHECK((f.stiffness * ones).norm() < 1e-12 * f.stiffness.norm());
  CHECK(f.mass.diagonal().sum() == doctest::Approx(surface_and_wetted_area(m, c60.container).area_m).epsilon(1e-12));
  CHECK(f.components == 1);
}

TEST_CASE("stiffness matches the P1 Dirichlet energy") {
  const auto ball = fixture::ball_cap(0.5, 0.3);
  const TriMesh m = fixture::mesh_of(ball, 2500);
  const IndexForm f = form_of(m, ball);
  const Vec3 a = Vec3(0.3, -0.2, 0.9).normalized();
  const Eigen::VectorXd z = sample(m, [&](const Vec3& x) { return std::sin(2.0 * x.dot(a)) + x.squaredNorm(); });
  const double oracle_j = oracle::dirichlet_energy(m, z) - z.dot(f.curvature_mass * z) - z.dot(f.robin_mass * z);
  CHECK(evaluate_J(f, z).value == doctest::Approx(oracle_j).epsilon(1e-8));
}

TEST_CASE("index form on constants and Jacobi fields") {
  const auto disk = fixture::ball_disk();
  const TriMesh dm = fixture::mesh_of(disk, 2500);
  const double c = 0.7;
  const JValue jc = evaluate_J(form_of(dm, disk), Eigen::VectorXd::Constant(dm.vertex_count(), c));
  CHECK(jc.value == doctest::Approx(-2.0 * M_PI * c * c).epsilon(1e-3));
  CHECK(jc.norm2 == doctest::Approx(M_PI * c * c).epsilon(1e-3));

  const auto hs = fixture::half_space_cap(0.0);
  std::vector<double> h, j3, j1;
  for (int faces : fixture::ladder_faces()) {
    const TriMesh m = fixture::mesh_of(hs, faces);
    const IndexForm f = form_of(m, hs);
    const VertexGeometry g = vertex_geometry(m, hs.container);
    Eigen::VectorXd n3(m.vertex_count()), n1(m.vertex_count());
    for (int v = 0; v < m.vertex_count(); ++v) {
      n3[v] = g.normal[v].z();
      n1[v] = g.normal[v].x();
    }
    h.push_back(m.max_edge_length());
    const JValue a3 = evaluate_J(f, n3), a1 = evaluate_J(f, n1);
    j3.push_back(a3.value / a3.norm2);
    j1.push_back(a1.value / a1.norm2);
  }
  CHECK(std::abs(j3[2]) < 1e-2);
  CHECK(std::abs(j1[2]) < 1e-2);
  CHECK(fixture::fitted_order(h, j3) >= 1.0);
  CHECK(fixture::fitted_order(h, j1) >= 1.0);
}

TEST_CASE("smallest eigenvalue agrees with a dense solve") {
  const fixture::Case cases[] = {fixture::half_space_cap(0.5), fixture::ball_cap(0.5, 0.3), fixture::ball_disk(),
                                 fixture::wedge_lune()};
  for (const auto& k : cases) {
    const TriMesh m = fixture::mesh_of(k, 150);
    const IndexForm f = form_of(m, k);
    const EigenResult r = min_eigenvalue_mean_zero(f);
    const double dense = oracle::dense_min_eigen_mean_zero(Eigen::MatrixXd(f.operator_matrix()), f.mass.diagonal());
    CHECK(r.lambda_min == doctest::Approx(dense).epsilon(1e-8).scale(1.0));
    CHECK(r.residual <= 1e-8);
    CHECK(std::abs(f.mass.diagonal().dot(r.eigenvector)) < 1e-10);
    CHECK(r.eigenvector.dot(f.mass * r.eigenvector) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("a mass shift moves the spectrum") {
  const auto c60 = fixture::half_space_cap(0.5);
  const TriMesh m = fixture::mesh_of(c60, 1000);
  const IndexForm f = form_of(m, c60);
  IndexForm g = f;
  const double sigma = 0.75;
  g.curvature_mass = f.curvature_mass + sigma * f.mass;
  const double l0 = min_eigenvalue_mean_zero(f).lambda_min;
  const double l1 = min_eigenvalue_mean_zero(g).lambda_min;
  CHECK(std::abs(l1 - (l0 - sigma)) < 1e-10 * std::max(1.0, std::abs(l0)));
}

TEST_CASE("stable single caps and an unstable pair") {
  const auto disk = fixture::ball_disk();
  const TriMesh dm = fixture::mesh_of(disk, 2500);
  CHECK(min_eigenvalue_mean_zero(form_of(dm, disk)).lambda_min >= -1e-2);

  const auto hs = fixture::half_space_cap(0.0);
  const TriMesh a = fixture::mesh_of(hs, 1000);
  TriMesh b = a;
  for (Vec3& x : b.mutable_vertices()) x += Vec3(3.0, 0.0, 0.0);
  const TriMesh two = merge_meshes(a, b, hs.container);
  const IndexForm f = form_of(two, hs);
  CHECK(f.components == 2);
  const EigenResult r = min_eigenvalue_mean_zero(f);
  CHECK(r.lambda_min < -1.0);
  // The minimiser is one cap against the other: constant sign on each component.
  int agree = 0;
  for (int v = 0; v < a.vertex_count(); ++v) agree += (r.eigenvector[v] > 0) == (r.eigenvector[0] > 0);
  CHECK(agree == a.vertex_count());
}
