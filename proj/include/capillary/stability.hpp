#pragma once

#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "capillary/container.hpp"
#include "capillary/geometry.hpp"
#include "capillary/trimesh.hpp"

namespace capillary {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class QBranch { General, Wedge, Ball };

const char* to_string(QBranch b);

/// Robin weight per contact-line vertex, aligned with VertexGeometry::boundary.
struct QCoefficient {
  std::vector<double> q;
  std::vector<int> vertex;
  QBranch branch = QBranch::General;
};

/// q = h^{dOmega}(nubar,nubar)/sin(theta) + cot(theta) h(mu,mu) with theta = arccos(beta)
/// of the vertex's facet. Throws IllConditioned when theta is within 1e-3 of 0 or pi.
QCoefficient q_coefficient(const TriMesh& mesh, const Container& container, const VertexGeometry& geom,
                           std::span<const double> betas);

/// J(zeta) = zeta^T (stiffness - curvature_mass - robin_mass) zeta.
struct IndexForm {
  SparseMatrix stiffness;       // cotangent Dirichlet form
  SparseMatrix curvature_mass;  // diag(A_v |h|^2_v)
  SparseMatrix robin_mass;      // diag(l_v q_v) on Gamma
  SparseMatrix mass;            // diag(A_v)
  QCoefficient q;
  int components = 1;

  SparseMatrix operator_matrix() const { return stiffness - curvature_mass - robin_mass; }
};

IndexForm assemble_index_form(const TriMesh& mesh, const Container& container, const VertexGeometry& geom,
                              std::span<const double> betas);
IndexForm assemble_index_form(const TriMesh& mesh, const Container& container, std::span<const double> betas);

struct JValue {
  double value = 0.0;
  double integral = 0.0;  // 1^T mass zeta, zero for admissible variations
  double norm2 = 0.0;     // zeta^T mass zeta
};

JValue evaluate_J(const IndexForm& form, const Eigen::VectorXd& zeta);

struct EigenConfig {
  double tolerance = 1e-8;  // relative residual of the returned pair
  int krylov_dimension = 60;
  int max_restarts = 60;
};

struct EigenResult {
  double lambda_min = 0.0;
  Eigen::VectorXd eigenvector;  // mass-normalised, mean zero
  double residual = 0.0;
  double shift = 0.0;
  int restarts = 0;
};

/// Smallest eigenvalue of (stiffness - curvature_mass - robin_mass) zeta = lambda mass zeta
/// on {1^T mass zeta = 0}, by shift-invert Lanczos with a bordered solve for the
/// constraint and full reorthogonalisation. Throws NoConvergence.
EigenResult min_eigenvalue_mean_zero(const IndexForm& form, const EigenConfig& config = {});

}  // namespace capillary
