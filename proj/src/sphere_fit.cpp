#include "capillary/sphere_fit.hpp"

#include <cmath>

#include "capillary/error.hpp"

namespace capillary {

namespace {

SphereFit fit_plane(std::span<const Vec3> p, const Vec3& centroid, const Eigen::SelfAdjointEigenSolver<Mat3>& es,
                    double diameter) {
  SphereFit out;
  out.is_flat = true;
  out.center = centroid;
  out.radius = std::numeric_limits<double>::infinity();
  out.plane_normal = es.eigenvectors().col(0);
  double s = 0.0;
  for (const Vec3& x : p) {
    const double d = (x - centroid).dot(out.plane_normal);
    s += d * d;
  }
  out.rms_deviation = std::sqrt(s / static_cast<double>(p.size())) / diameter;
  out.plane_rms_deviation = out.rms_deviation;
  return out;
}

}  // namespace

SphereFit fit_sphere(std::span<const Vec3> p) {
  const int n = static_cast<int>(p.size());
  if (n < 10) throw Error(ErrorKind::DegeneratePoints, "sphere fit needs at least 10 points");

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& x : p) centroid += x;
  centroid /= n;
  Mat3 cov = Mat3::Zero();
  double diameter = 0.0;
  for (const Vec3& x : p) {
    cov += (x - centroid) * (x - centroid).transpose();
    diameter = std::max(diameter, 2.0 * (x - centroid).norm());
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> es(cov / n);
  const double spread = es.eigenvalues()(2);
  if (!(spread > 0.0) || es.eigenvalues()(1) <= 1e-12 * spread) {
    throw Error(ErrorKind::DegeneratePoints, "points are collinear or coincident");
  }

  // Kasa: |x|^2 = 2<c, x> + (r^2 - |c|^2), solved in centred coordinates.
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 y = (p[i] - centroid) / diameter;
    a.row(i) << 2.0 * y.x(), 2.0 * y.y(), 2.0 * y.z(), 1.0;
    b(i) = y.squaredNorm();
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 4) return fit_plane(p, centroid, es, diameter);
  const Eigen::Vector4d sol = qr.solve(b);
  Vec3 c = sol.head<3>();
  double r2 = sol(3) + c.squaredNorm();
  if (!(r2 > 0.0) || std::sqrt(r2) > 1e3) return fit_plane(p, centroid, es, diameter);
  double r = std::sqrt(r2);

  SphereFit out;
  // Gauss-Newton on d_i = |y_i - c| - r.
  for (int it = 0; it < 50; ++it) {
    Eigen::MatrixXd j(n, 4);
    Eigen::VectorXd res(n);
    for (int i = 0; i < n; ++i) {
      const Vec3 y = (p[i] - centroid) / diameter;
      const Vec3 d = y - c;
      const double dist = d.norm();
      res(i) = dist - r;
      j.row(i) << -d.x() / dist, -d.y() / dist, -d.z() / dist, -1.0;
    }
    const Eigen::Vector4d step = j.colPivHouseholderQr().solve(-res);
    c += step.head<3>();
    r += step(3);
    out.gauss_newton_iterations = it + 1;
    if (step.norm() < 1e-15 * (1.0 + r)) break;
    if (r > 1e3) return fit_plane(p, centroid, es, diameter);
  }
  out.center = centroid + diameter * c;
  out.radius = diameter * r;
  double s = 0.0;
  for (const Vec3& x : p) {
    const double d = (x - out.center).norm() - out.radius;
    s += d * d;
  }
  out.rms_deviation = std::sqrt(s / n) / out.radius;
  out.plane_rms_deviation = fit_plane(p, centroid, es, diameter).rms_deviation;
  return out;
}

}  // namespace capillary
