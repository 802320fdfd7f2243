#pragma once

#include <string>
#include <vector>

#include "capillary/caps.hpp"
#include "capillary/geometry.hpp"

namespace capillary {

/// One named residual with the scale it was divided by.
struct Residual {
  std::string name;
  double value = 0.0;
  std::string scale;  // e.g. "area_M", "H*wetted", "absolute"
};

struct ResidualReport {
  std::vector<Residual> residuals;
  double max_edge_length = 0.0;
  std::vector<double> balancing_per_facet;

  void add(std::string name, double value, std::string scale);
  /// Value of a named residual; throws InvalidArgument when absent.
  double get(const std::string& name) const;
};

/// |sum_v A_v (2 - H<x,nu> + 2<nu,k>)| / |M|. Planar facets must pass through
/// the origin; the ball raises WrongContainer.
double minkowski_residual_wedge(const TriMesh& mesh, const Container& container, const VertexGeometry& geom,
                                const WedgeVector& k);

/// max over coordinate directions a of |sum_v A_v (2<x + cos(theta) nu, a> - H<X_a, nu>)| / |M|.
double minkowski_residual_ball(const TriMesh& mesh, const Container& container, const VertexGeometry& geom);

struct Balancing {
  std::vector<double> lhs;       // H |B+_i|
  std::vector<double> rhs;       // sin(theta_i) |Gamma_i|
  std::vector<double> residual;  // |lhs - rhs| / lhs, or absolute when H ~ 0
  bool absolute = false;
  double mean_curvature = 0.0;
};

/// Planar facets: H |B+_i| = sin(theta_i) |Gamma_i| with H the area-weighted mean of the fitted H.
/// Ball: the vector form H * vector area(B+) = integral of mu over Gamma, whose
/// scalar version for planar facets is the line above.
Balancing balancing_residual(const TriMesh& mesh, const Container& container, const VertexGeometry& geom);

struct YoungCmc {
  double angle_dev_max = 0.0;  // radians, corner vertices excluded
  double cmc_rel_stdev = 0.0;  // stdev/|mean| of the fitted H over interior vertices
  double mean_curvature = 0.0;
  bool flat = false;           // when set, cmc_rel_stdev holds the absolute stdev times sqrt(|M|)
};

YoungCmc young_cmc_deviation(const TriMesh& mesh, const Container& container, const VertexGeometry& geom);

/// Ambient vector fields with closed-form Jacobians.
struct AmbientField {
  enum class Kind { Constant, Linear, Position, ConformalKilling };
  Kind kind = Kind::Position;
  Vec3 a = Vec3::Zero();   // constant value or X_a direction
  Mat3 m = Mat3::Zero();   // Linear: X(x) = m x

  static AmbientField constant(const Vec3& a);
  static AmbientField linear(const Mat3& m);
  static AmbientField position();
  static AmbientField conformal_killing(const Vec3& a);

  Vec3 value(const Vec3& x) const;
  Mat3 jacobian(const Vec3& x) const;  // J(i,j) = d X_i / d x_j
};

/// |int div_M X - int H<X,nu> - int_Gamma <X,mu>| / |M| with vertex quadrature
/// and the trapezoid rule on Gamma.
double divergence_residual(const TriMesh& mesh, const VertexGeometry& geom, const AmbientField& field);

/// 2 int nu - int_Gamma (<x,mu> nu - <x,nu> mu).
Vec3 flux_identity_defect(const TriMesh& mesh, const VertexGeometry& geom);
double flux_identity_residual(const TriMesh& mesh, const VertexGeometry& geom);

/// Defects of the pointwise PDE identities of the test functions, sampled exactly
/// on a cap and differentiated with the mesh operators.
struct PointwiseDefects {
  double zeta_l2 = 0.0;          // Delta zeta + H^2 + |h|^2 (zeta - 2)
  double phi_wedge_l2 = 0.0;     // Delta Phi_w - 2(|h|^2 - H^2/2)<x,nu>
  double phi_a_l2 = 0.0;         // Delta phi_a + |h|^2 phi_a - (2|h|^2 - H^2)<x,a>
  double phi_ball_l2 = 0.0;      // Delta Phi_b - (2|h|^2 - H^2)<x,nu>
  double zeta_robin_max = 0.0;   // <grad zeta, mu> - q zeta on Gamma
  double phi_a_robin_max = 0.0;  // <grad phi_a, mu> - q phi_a on Gamma
  double phi_ball_boundary_max = 0.0;  // |Phi_b| on Gamma
  double zeta_sup = 0.0;         // sup |zeta| over all vertices
  double phi_ball_sup = 0.0;     // sup |Phi_b| over all vertices
};

/// L2 norms are area-weighted RMS over interior vertices; Robin maxima skip wedge
/// corners. Planar containers fill the wedge entries, the ball the ball entries.
PointwiseDefects pointwise_defects(const TriMesh& mesh, const Container& container, const CapSolution& cap,
                                   const Vec3& a);

/// Per-vertex gradient of a piecewise-linear field (area-weighted face average).
std::vector<Vec3> vertex_gradients(const TriMesh& mesh, const std::vector<double>& f);

}  // namespace capillary
