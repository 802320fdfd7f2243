#include "capillary/container.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "capillary/error.hpp"

namespace capillary {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::InvalidMesh: return "invalid mesh";
    case ErrorKind::CapOutsideContainer: return "cap outside container";
    case ErrorKind::MeshTooCoarse: return "mesh too coarse";
    case ErrorKind::OpenBoundary: return "open boundary";
    case ErrorKind::BoundaryWinding: return "boundary winding";
    case ErrorKind::DegenerateVertex: return "degenerate vertex";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::SingularGram: return "singular Gram matrix";
    case ErrorKind::NoConvergence: return "no convergence";
    case ErrorKind::WrongContainer: return "wrong container";
    case ErrorKind::NotOnBoundary: return "not on boundary";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::DegeneratePoints: return "degenerate points";
    case ErrorKind::Io: return "i/o";
  }
  return "unknown";
}

const char* to_string(ContainerKind kind) {
  switch (kind) {
    case ContainerKind::HalfSpace: return "half_space";
    case ContainerKind::Wedge: return "wedge";
    case ContainerKind::Ball: return "ball";
  }
  return "unknown";
}

int first_facet(FacetMask mask) { return mask == 0 ? -1 : std::countr_zero(mask); }

int facet_count_in(FacetMask mask) { return std::popcount(mask); }

Container Container::half_space(const Vec3& outward_normal, double offset, double beta) {
  Container c;
  c.kind_ = ContainerKind::HalfSpace;
  c.planes_ = {Plane{outward_normal, offset}};
  c.betas_ = {beta};
  c.validate();
  return c;
}

Container Container::wedge(const std::vector<Vec3>& outward_normals, const std::vector<double>& betas) {
  if (outward_normals.size() != betas.size() || outward_normals.empty()) {
    throw Error(ErrorKind::InvalidArgument, "wedge needs one beta per facet normal");
  }
  if (outward_normals.size() > 3) {
    throw Error(ErrorKind::InvalidArgument, "at most 3 independent facets exist in 3-space");
  }
  Container c;
  c.kind_ = ContainerKind::Wedge;
  for (const auto& n : outward_normals) c.planes_.push_back(Plane{n, 0.0});
  c.betas_ = betas;
  c.validate();
  return c;
}

Container Container::unit_ball(double beta) {
  Container c;
  c.kind_ = ContainerKind::Ball;
  c.betas_ = {beta};
  c.validate();
  return c;
}

void Container::validate() const {
  for (double b : betas_) {
    if (!(std::abs(b) < 1.0)) {
      std::ostringstream os;
      os << "adhesion coefficient " << b << " violates |beta| < 1";
      throw Error(ErrorKind::InvalidArgument, os.str());
    }
  }
  for (const auto& p : planes_) {
    if (std::abs(p.normal.norm() - 1.0) > 1e-12) {
      throw Error(ErrorKind::InvalidArgument, "facet normals must be unit vectors");
    }
  }
  if (planes_.size() > 1) {
    const int l = static_cast<int>(planes_.size());
    Eigen::MatrixXd gram(l, l);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j) gram(i, j) = planes_[i].normal.dot(planes_[j].normal);
    if (std::abs(gram.determinant()) < 1e-10) {
      throw Error(ErrorKind::SingularGram, "wedge normals are not linearly independent");
    }
  }
}

Vec3 Container::wall_normal(int facet, const Vec3& x) const {
  if (kind_ == ContainerKind::Ball) return x.normalized();
  return planes_.at(facet).normal;
}

double Container::wall_distance(int facet, const Vec3& x) const {
  if (kind_ == ContainerKind::Ball) return x.norm() - 1.0;
  const auto& p = planes_.at(facet);
  return p.normal.dot(x) - p.offset;
}

double Container::wall_support(int facet) const {
  if (kind_ == ContainerKind::Ball) return 1.0;
  return planes_.at(facet).offset;
}

bool Container::contains(const Vec3& x, double tol) const {
  for (int f = 0; f < facet_count(); ++f) {
    if (wall_distance(f, x) > tol) return false;
  }
  return true;
}

FacetMask Container::facets_at(const Vec3& x, double tol) const {
  FacetMask m = 0;
  for (int f = 0; f < facet_count(); ++f) {
    if (std::abs(wall_distance(f, x)) <= tol) m |= FacetMask{1} << f;
  }
  return m;
}

namespace {

// Rows of the active plane normals and offsets selected by mask.
void active_planes(const std::vector<Plane>& planes, FacetMask mask, Eigen::MatrixXd& n, Eigen::VectorXd& off) {
  const int k = facet_count_in(mask);
  n.resize(k, 3);
  off.resize(k);
  int row = 0;
  for (int f = 0; f < static_cast<int>(planes.size()); ++f) {
    if (mask & (FacetMask{1} << f)) {
      n.row(row) = planes[f].normal.transpose();
      off(row) = planes[f].offset;
      ++row;
    }
  }
}

}  // namespace

Vec3 Container::retract(FacetMask mask, const Vec3& x) const {
  if (mask == 0) return x;
  if (kind_ == ContainerKind::Ball) return x.normalized();
  if (facet_count_in(mask) == 1) {
    const auto& p = planes_.at(first_facet(mask));
    return x - (p.normal.dot(x) - p.offset) * p.normal;
  }
  Eigen::MatrixXd n;
  Eigen::VectorXd off;
  active_planes(planes_, mask, n, off);
  const Eigen::MatrixXd gram = n * n.transpose();
  const Eigen::VectorXd r = n * x - off;
  return x - n.transpose() * gram.ldlt().solve(r);
}

Vec3 Container::project_tangent(FacetMask mask, const Vec3& x, const Vec3& v) const {
  if (mask == 0) return v;
  if (kind_ == ContainerKind::Ball) {
    const Vec3 n = x.normalized();
    return v - n.dot(v) * n;
  }
  if (facet_count_in(mask) == 1) {
    const Vec3& n = planes_.at(first_facet(mask)).normal;
    return v - n.dot(v) * n;
  }
  Eigen::MatrixXd n;
  Eigen::VectorXd off;
  active_planes(planes_, mask, n, off);
  const Eigen::MatrixXd gram = n * n.transpose();
  return v - n.transpose() * gram.ldlt().solve(n * v);
}

}  // namespace capillary
