#include "capillary/stability.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "capillary/error.hpp"

namespace capillary {

const char* to_string(QBranch b) {
  switch (b) {
    case QBranch::General: return "general";
    case QBranch::Wedge: return "wedge";
    case QBranch::Ball: return "ball";
  }
  return "unknown";
}

QCoefficient q_coefficient(const TriMesh& mesh, const Container& container, const VertexGeometry& geom,
                           std::span<const double> betas) {
  (void)mesh;
  if (static_cast<int>(betas.size()) != container.facet_count()) {
    throw Error(ErrorKind::InvalidArgument, "one beta per facet is required");
  }
  QCoefficient out;
  out.branch = container.kind() == ContainerKind::Ball ? QBranch::Ball : QBranch::Wedge;
  for (const BoundaryFrame& f : geom.boundary) {
    const double theta = std::acos(betas[f.facet]);
    if (theta < 1e-3 || theta > M_PI - 1e-3) {
      throw Error(ErrorKind::IllConditioned, "contact angle too close to 0 or pi for q");
    }
    const double s = std::sin(theta);
    out.q.push_back(container.wall_curvature() / s + std::cos(theta) / s * f.normal_curvature);
    out.vertex.push_back(f.vertex);
  }
  return out;
}

IndexForm assemble_index_form(const TriMesh& mesh, const Container& container, const VertexGeometry& geom,
                              std::span<const double> betas) {
  const int n = mesh.vertex_count();
  IndexForm form;
  form.q = q_coefficient(mesh, container, geom, betas);
  form.components = mesh.topology().components;

  const auto w = cotan_weights(mesh);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * w.size());
  const auto& edges = mesh.topology().edges;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int a = edges[e].a, b = edges[e].b;
    trip.emplace_back(a, a, w[e]);
    trip.emplace_back(b, b, w[e]);
    trip.emplace_back(a, b, -w[e]);
    trip.emplace_back(b, a, -w[e]);
  }
  form.stiffness.resize(n, n);
  form.stiffness.setFromTriplets(trip.begin(), trip.end());

  auto diagonal = [n](const std::vector<double>& d) {
    SparseMatrix m(n, n);
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
      if (d[i] != 0.0) t.emplace_back(i, i, d[i]);
    }
    m.setFromTriplets(t.begin(), t.end());
    return m;
  };
  std::vector<double> curv(n), robin(n, 0.0);
  for (int v = 0; v < n; ++v) curv[v] = geom.area[v] * geom.shape_norm2[v];
  for (std::size_t i = 0; i < geom.boundary.size(); ++i) {
    robin[geom.boundary[i].vertex] += geom.boundary[i].length_weight * form.q.q[i];
  }
  form.curvature_mass = diagonal(curv);
  form.robin_mass = diagonal(robin);
  form.mass = diagonal(geom.area);
  return form;
}

IndexForm assemble_index_form(const TriMesh& mesh, const Container& container, std::span<const double> betas) {
  return assemble_index_form(mesh, container, vertex_geometry(mesh, container), betas);
}

JValue evaluate_J(const IndexForm& form, const Eigen::VectorXd& zeta) {
  if (zeta.size() != form.mass.rows()) throw Error(ErrorKind::InvalidArgument, "zeta size mismatch");
  JValue j;
  j.value = zeta.dot(form.operator_matrix() * zeta);
  const Eigen::VectorXd mz = form.mass * zeta;
  j.integral = mz.sum();
  j.norm2 = zeta.dot(mz);
  return j;
}

EigenResult min_eigenvalue_mean_zero(const IndexForm& form, const EigenConfig& config) {
  const SparseMatrix b = form.operator_matrix();
  const int n = static_cast<int>(b.rows());
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "index form too small");
  const Eigen::VectorXd m = form.mass.diagonal();
  if ((m.array() <= 0.0).any()) throw Error(ErrorKind::InvalidMesh, "non-positive vertex mass");
  const Eigen::VectorXd s = m.cwiseSqrt();

  // Gershgorin lower bound of M^{-1/2} B M^{-1/2}; the shifted pencil is then positive definite.
  double gershgorin = std::numeric_limits<double>::infinity();
  {
    Eigen::VectorXd center(n), radius = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < b.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(b, k); it; ++it) {
        if (it.row() == it.col()) {
          center(it.row()) = it.value() / m(it.row());
        } else {
          radius(it.row()) += std::abs(it.value()) / (s(it.row()) * s(it.col()));
        }
      }
    }
    for (int i = 0; i < n; ++i) gershgorin = std::min(gershgorin, center(i) - radius(i));
    gershgorin -= 1e-6 * (1.0 + std::abs(gershgorin));
  }
  // The Gershgorin bound sits far below the spectrum on fine meshes, which
  // flattens the inverted spectrum. Walk down from -1/|M| instead and accept the
  // first shift whose LDL^T pivots are all positive (Sylvester's law of inertia).
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  double sigma = -1.0 / m.sum();
  for (;;) {
    if (sigma <= gershgorin) sigma = gershgorin;
    ldlt.compute(b - sigma * form.mass);
    if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) break;
    if (sigma == gershgorin) break;
    sigma = 2.0 * sigma - 1.0 / m.sum();
  }
  if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "shifted index form is singular");

  const Eigen::VectorXd w = s / s.norm();
  auto apply_inverse = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    return s.cwiseProduct(ldlt.solve(s.cwiseProduct(r)));
  };
  const Eigen::VectorXd z = apply_inverse(w);
  const double zw = z.dot(w);
  // Inverse of the shifted operator restricted to the complement of w.
  auto apply_t = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    Eigen::VectorXd y = apply_inverse(r);
    y -= (y.dot(w) / zw) * z;
    y -= y.dot(w) * w;
    return y;
  };
  auto apply_a = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return (b * y.cwiseQuotient(s)).cwiseQuotient(s);
  };

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd start(n);
  for (int i = 0; i < n; ++i) start(i) = gauss(rng);
  const int dim = std::min(config.krylov_dimension, n - 1);

  EigenResult out;
  out.shift = sigma;
  for (int restart = 0; restart <= config.max_restarts; ++restart) {
    start -= start.dot(w) * w;
    start.normalize();
    Eigen::MatrixXd v(n, dim);
    Eigen::VectorXd alpha(dim), beta(dim);
    v.col(0) = start;
    int used = dim;
    for (int j = 0; j < dim; ++j) {
      Eigen::VectorXd r = apply_t(v.col(j));
      alpha(j) = v.col(j).dot(r);
      // Full reorthogonalisation, twice for stability.
      for (int pass = 0; pass < 2; ++pass) {
        r -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * r);
        r -= r.dot(w) * w;
      }
      beta(j) = r.norm();
      if (j + 1 == dim) break;
      if (beta(j) < 1e-14 * std::abs(alpha(j))) {
        used = j + 1;
        break;
      }
      v.col(j + 1) = r / beta(j);
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
    for (int j = 0; j < used; ++j) {
      t(j, j) = alpha(j);
      if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta(j);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const double theta = es.eigenvalues()(used - 1);
    Eigen::VectorXd y = v.leftCols(used) * es.eigenvectors().col(used - 1);
    y -= y.dot(w) * w;
    y.normalize();
    const double lambda = sigma + 1.0 / theta;
    Eigen::VectorXd res = apply_a(y) - lambda * y;
    res -= res.dot(w) * w;
    out.lambda_min = y.dot(apply_a(y));
    out.residual = res.norm() / std::max(1.0, std::abs(lambda));
    out.restarts = restart;
    out.eigenvector = y.cwiseQuotient(s);
    if (out.residual < config.tolerance) return out;
    start = y;
  }
  std::ostringstream os;
  os << "Lanczos did not reach residual " << config.tolerance << " (last " << out.residual << ")";
  throw Error(ErrorKind::NoConvergence, os.str());
}

}  // namespace capillary
