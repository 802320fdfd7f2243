#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "capillary/trimesh.hpp"

// Reference values computed without the library: closed-form cap integrals,
// Monte Carlo volumes, dense eigensolves and a hand-built CMC cylinder.
namespace oracle {

using capillary::Vec3;

/// Spherical cap of radius rho meeting a plane at contact angle theta.
double cap_volume(double rho, double theta);
double cap_area(double rho, double theta);
double cap_wetted(double rho, double theta);
double cap_contact_length(double rho, double theta);

/// Volume of B(c, rho) intersected with the unit ball (lens formula).
double ball_lens_volume(double c_norm, double rho);

struct MonteCarlo {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Hit-or-miss estimate of the volume of {x in box : inside(x)}.
MonteCarlo monte_carlo_volume(const std::function<bool(const Vec3&)>& inside, const Vec3& lo, const Vec3& hi,
                              int samples, std::uint64_t seed);

/// Smallest eigenvalue of K y = lambda diag(m) y over {sum m_i y_i = 0}, dense.
double dense_min_eigen_mean_zero(const Eigen::MatrixXd& k, const Eigen::VectorXd& m);

/// Dirichlet energy sum_f area_f |grad f|^2 of the piecewise-linear interpolant.
double dirichlet_energy(const capillary::TriMesh& mesh, const Eigen::VectorXd& f);

/// Circular cylinder x^2 + (y + y0)^2 = r^2 between the floor z = 0 and the
/// plane y sin(alpha) + z cos(alpha) = 0 through the x-axis; n_phi columns and
/// n_z layers, outward normals.
struct CylinderPatch {
  std::vector<Vec3> vertices;
  std::vector<capillary::Face> faces;
  Vec3 floor_normal;
  Vec3 ceiling_normal;
  double radius = 0.0;
  double y0 = 0.0;

  Vec3 normal_at(const Vec3& x) const;
};

CylinderPatch cylinder_patch(double r, double y0, double alpha, int n_phi, int n_z);

}  // namespace oracle
