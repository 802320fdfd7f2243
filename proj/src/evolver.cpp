#include "capillary/evolver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "capillary/energy.hpp"
#include "capillary/error.hpp"
#include "capillary/geometry.hpp"

namespace capillary {

namespace {

class SobolevPreconditioner {
 public:
  SobolevPreconditioner(const TriMesh& mesh) {
    const int n = mesh.vertex_count();
    const auto w = cotan_weights(mesh);
    const auto area = mixed_voronoi_areas(mesh);
    double total = 0.0;
    for (double a : area) total += a;
    const double eps = 1.0 / total;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * w.size() + n);
    const auto& edges = mesh.topology().edges;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const int a = edges[e].a, b = edges[e].b;
      trip.emplace_back(a, a, w[e]);
      trip.emplace_back(b, b, w[e]);
      trip.emplace_back(a, b, -w[e]);
      trip.emplace_back(b, a, -w[e]);
    }
    for (int v = 0; v < n; ++v) trip.emplace_back(v, v, eps * area[v]);
    Eigen::SparseMatrix<double> k(n, n);
    k.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(k);
    ok_ = solver_.info() == Eigen::Success;
  }

  bool ok() const { return ok_; }

  std::vector<Vec3> apply(const std::vector<Vec3>& g) const {
    const int n = static_cast<int>(g.size());
    Eigen::MatrixXd rhs(n, 3);
    for (int v = 0; v < n; ++v) rhs.row(v) = g[v].transpose();
    const Eigen::MatrixXd y = solver_.solve(rhs);
    std::vector<Vec3> out(n);
    for (int v = 0; v < n; ++v) out[v] = y.row(v).transpose();
    return out;
  }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  bool ok_ = false;
};

Vec3 d_prev_or_zero(const std::vector<Vec3>& d, int i) { return d.empty() ? Vec3::Zero() : d[i]; }

double mean_edge_length(const TriMesh& mesh) {
  const auto& x = mesh.vertices();
  double s = 0.0;
  for (const Edge& e : mesh.topology().edges) s += (x[e.a] - x[e.b]).norm();
  return s / static_cast<double>(mesh.topology().edges.size());
}

/// Tangential vertex averaging: interior vertices move halfway to their 1-ring
/// centroid within the tangent plane, contact-line vertices halfway to the
/// midpoint of their loop neighbours along the line. Wedge-edge vertices stay.
void tangential_smoothing(TriMesh& mesh, const Container& container, int sweeps) {
  const auto& topo = mesh.topology();
  for (int s = 0; s < sweeps; ++s) {
    const auto n = area_weighted_normals(mesh);
    const std::vector<Vec3> x = mesh.vertices();
    auto& y = mesh.mutable_vertices();
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const FacetMask mask = mesh.facet_masks()[v];
      if (mask == 0) {
        Vec3 c = Vec3::Zero();
        for (int j : topo.neighbors[v]) c += x[j];
        Vec3 delta = c / static_cast<double>(topo.neighbors[v].size()) - x[v];
        delta -= n[v].dot(delta) * n[v];
        y[v] = x[v] + 0.5 * delta;
      } else if (facet_count_in(mask) == 1) {
        const int prev = topo.loop_prev[v], next = topo.loop_next[v];
        const Vec3 t = container.project_tangent(mask, x[v], x[next] - x[prev]).normalized();
        const Vec3 delta = 0.5 * (x[prev] + x[next]) - x[v];
        y[v] = container.retract(mask, x[v] + 0.5 * t.dot(delta) * t);
      }
    }
  }
}

/// Contact-line shifts along the rigid motions that preserve the container:
/// the two rotations off the contact-line axis in the ball, the two in-plane
/// translations of a half-space, the translation along a two-facet wedge edge.
std::vector<std::vector<Vec3>> pin_fields(const TriMesh& mesh, const Container& container) {
  std::vector<Vec3> dirs;
  if (container.kind() == ContainerKind::Ball) {
    Vec3 c = Vec3::Zero();
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (mesh.facet_masks()[v] != 0) c += mesh.vertices()[v];
    }
    if (c.norm() > 0.0) {
      c.normalize();
      const Vec3 e = c.unitOrthogonal();
      dirs = {e, c.cross(e)};
    }
  } else if (container.kind() == ContainerKind::HalfSpace) {
    const Vec3 n = container.planes()[0].normal;
    const Vec3 e = n.unitOrthogonal();
    dirs = {e, n.cross(e)};
  } else if (container.facet_count() == 2) {
    dirs = {container.planes()[0].normal.cross(container.planes()[1].normal).normalized()};
  }
  std::vector<std::vector<Vec3>> out;
  for (const Vec3& e : dirs) {
    std::vector<Vec3> f(mesh.vertex_count(), Vec3::Zero());
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const FacetMask mask = mesh.facet_masks()[v];
      if (mask != 0 && facet_count_in(mask) == 1) f[v] = e;
    }
    out.push_back(std::move(f));
  }
  return out;
}

/// Coefficients c minimising |y - sum c_j a_j| in the Euclidean vertex metric.
Eigen::VectorXd fit_coefficients(const std::vector<std::vector<Vec3>>& a, const std::vector<Vec3>& y) {
  const int m = static_cast<int>(a.size());
  Eigen::MatrixXd gram(m, m);
  Eigen::VectorXd rhs(m);
  for (int j = 0; j < m; ++j) {
    rhs(j) = field_dot(a[j], y);
    for (int k = 0; k < m; ++k) gram(j, k) = field_dot(a[j], a[k]);
  }
  return gram.completeOrthogonalDecomposition().solve(rhs);
}

/// Coefficients c with <a_k, y - sum c_j w_j> = 0 for every k.
Eigen::VectorXd oblique_coefficients(const std::vector<std::vector<Vec3>>& a, const std::vector<std::vector<Vec3>>& w,
                                     const std::vector<Vec3>& y) {
  const int m = static_cast<int>(a.size());
  Eigen::MatrixXd mat(m, m);
  Eigen::VectorXd rhs(m);
  for (int k = 0; k < m; ++k) {
    rhs(k) = field_dot(a[k], y);
    for (int j = 0; j < m; ++j) mat(k, j) = field_dot(a[k], w[j]);
  }
  return mat.completeOrthogonalDecomposition().solve(rhs);
}

void subtract_combination(std::vector<Vec3>& y, const std::vector<std::vector<Vec3>>& w, const Eigen::VectorXd& c) {
  for (std::size_t j = 0; j < w.size(); ++j) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= c(j) * w[j][i];
  }
}

struct Stationarity {
  double lambda;
  double norm;
  std::vector<Vec3> residual;
};

/// Multipliers of the volume constraint (first field) and the pins, and the
/// remaining gradient read as an L2 norm of H - lambda, divided by the natural
/// size |lambda| sqrt(|M|) floored at 1 for nearly flat surfaces.
Stationarity stationarity(const TriMesh& mesh, const std::vector<Vec3>& g,
                          const std::vector<std::vector<Vec3>>& constraints) {
  const Eigen::VectorXd c = fit_coefficients(constraints, g);
  std::vector<Vec3> r = g;
  subtract_combination(r, constraints, c);
  const auto area = mixed_voronoi_areas(mesh);
  double s = 0.0, total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    s += r[i].squaredNorm() / area[i];
    total += area[i];
  }
  return {c(0), std::sqrt(s) / std::max(1.0, std::abs(c(0)) * std::sqrt(total)), std::move(r)};
}

}  // namespace

void EvolveConfig::validate() const {
  if (!(target_volume > 0.0)) throw Error(ErrorKind::InvalidArgument, "target_volume must be positive");
  if (max_iterations < 0) throw Error(ErrorKind::InvalidArgument, "max_iterations must be non-negative");
  if (!(gradient_tolerance > 0.0 && volume_restore_tolerance > 0.0 && initial_step > 0.0 &&
        sufficient_decrease > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "tolerances and step parameters must be positive");
  }
  if (!(shrink > 0.0 && shrink < 1.0)) throw Error(ErrorKind::InvalidArgument, "shrink factor must lie in (0,1)");
  if (smoothing_sweeps < 0 || !(smooth_below_angle >= 0.0 && smooth_below_angle < M_PI / 3.0)) {
    throw Error(ErrorKind::InvalidArgument, "smoothing needs sweeps >= 0 and a trigger angle in [0, 60) degrees");
  }
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::GradientTolerance: return "gradient_tolerance";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::LineSearchStagnation: return "line_search_stagnation";
    case Termination::MeshDegenerated: return "mesh_degenerated";
  }
  return "unknown";
}

double lagrange_multiplier(const TriMesh& mesh, const Container& container, std::span<const double> betas) {
  const auto g = energy_gradient(mesh, container, betas);
  const auto v = volume_gradient(mesh, container);
  return field_dot(g, v) / field_dot(v, v);
}

EvolveResult evolve(TriMesh mesh, const Container& container, std::span<const double> betas,
                    const EvolveConfig& config) {
  config.validate();
  const double target = config.target_volume;
  volume_project(mesh, container, target, config.volume_restore_tolerance);

  EvolveResult result{std::move(mesh), 0.0, {}, Termination::MaxIterations, {}, 0};
  TriMesh& m = result.mesh;
  const int nv = m.vertex_count();
  double e0 = energy(m, container, betas);
  double step = -1.0;
  std::vector<Vec3> d_prev, r_prev, z_prev;

  // Energy gradient and constraint fields (volume first, then pins), restricted
  // to the admissible motions.
  auto gradients = [&](std::vector<Vec3>& g, std::vector<std::vector<Vec3>>& cons) {
    g = energy_gradient(m, container, betas);
    cons.assign(1, volume_gradient(m, container));
    if (config.pin_symmetries) {
      for (auto& f : pin_fields(m, container)) cons.push_back(std::move(f));
    }
    if (config.normal_motion) {
      project_to_normal_motion(m, container, g);
      for (auto& f : cons) project_to_normal_motion(m, container, f);
    } else {
      for (std::size_t j = 1; j < cons.size(); ++j) project_to_constraints(m, container, cons[j]);
    }
  };

  for (int it = 0;; ++it) {
    std::vector<Vec3> g;
    std::vector<std::vector<Vec3>> cons;
    gradients(g, cons);
    Stationarity st = stationarity(m, g, cons);
    result.lagrange_multiplier = st.lambda;
    result.iterations = it;
    const double vol0 = enclosed_volume(m, container);
    result.history.push_back({it, e0, (vol0 - target) / target, st.norm, st.lambda});
    const double merit0 = e0 - st.lambda * (vol0 - target);

    if (st.norm < config.gradient_tolerance) {
      result.reason = Termination::GradientTolerance;
      return result;
    }
    if (it >= config.max_iterations) {
      result.reason = Termination::MaxIterations;
      return result;
    }

    // Search direction: metric gradient with its constraint-changing part removed.
    std::vector<Vec3> u = g;
    std::vector<std::vector<Vec3>> w = cons;
    if (config.metric == DescentMetric::Sobolev) {
      SobolevPreconditioner pre(m);
      if (!pre.ok()) {
        result.reason = Termination::MeshDegenerated;
        result.diagnostic = "preconditioner factorization failed";
        return result;
      }
      u = pre.apply(g);
      for (auto& f : w) f = pre.apply(f);
      auto restrict = [&](std::vector<Vec3>& f) {
        if (config.normal_motion) {
          project_to_normal_motion(m, container, f);
        } else {
          project_to_constraints(m, container, f);
        }
      };
      restrict(u);
      for (auto& f : w) restrict(f);
    }
    std::vector<Vec3> z = u;
    subtract_combination(z, w, oblique_coefficients(cons, w, u));
    const std::vector<Vec3>& r = st.residual;
    std::vector<Vec3> d(nv);
    // Polak-Ribiere conjugation in the descent metric, restarted when it stops descending.
    double pr = 0.0;
    if (config.conjugate && !d_prev.empty()) {
      double num = 0.0;
      for (int i = 0; i < nv; ++i) num += z[i].dot(r[i] - r_prev[i]);
      pr = std::max(0.0, num / field_dot(z_prev, r_prev));
    }
    for (int i = 0; i < nv; ++i) d[i] = -z[i] + pr * d_prev_or_zero(d_prev, i);
    if (pr > 0.0) {
      subtract_combination(d, w, oblique_coefficients(cons, w, d));
      if (!(field_dot(g, d) < 0.0)) {
        for (int i = 0; i < nv; ++i) d[i] = -z[i];
      }
    }
    d_prev = d;
    r_prev = r;
    z_prev = z;
    double dmax = 0.0;
    for (int i = 0; i < nv; ++i) dmax = std::max(dmax, d[i].norm());
    const double slope = field_dot(g, d);
    if (!(slope < 0.0) || dmax == 0.0) {
      result.reason = Termination::LineSearchStagnation;
      result.diagnostic = "search direction is not a descent direction";
      return result;
    }
    // Express the step as a vertex displacement length.
    for (auto& di : d) di /= dmax;
    const double dslope = slope / dmax;
    const double max_step = config.initial_step * mean_edge_length(m);
    step = step < 0.0 ? max_step : std::min(2.0 * step, max_step);

    const std::vector<Vec3> x0 = m.vertices();
    // Places the trial iterate and returns its merit, the energy corrected to first
    // order for the residual volume error; NaN when the trial is rejected.
    auto trial = [&](double s, double& e) {
      auto& x = m.mutable_vertices();
      for (int i = 0; i < nv; ++i) x[i] = container.retract(m.facet_masks()[i], x0[i] + s * d[i]);
      try {
        volume_project(m, container, target, config.volume_restore_tolerance);
        e = energy(m, container, betas);
        return e - st.lambda * (enclosed_volume(m, container) - target);
      } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(e0);
    bool accepted = false;
    double e1 = e0, merit1 = merit0;
    while (step >= 1e-14) {
      merit1 = trial(step, e1);
      if (merit1 <= merit0 + config.sufficient_decrease * step * dslope + slack) {
        accepted = true;
        break;
      }
      step *= config.shrink;
    }
    if (accepted) {
      // One quadratic-interpolation refinement keeps the conjugate directions effective.
      const double curv = merit1 - merit0 - dslope * step;
      if (curv > 0.0) {
        const double best = -dslope * step * step / (2.0 * curv);
        if (best > 0.1 * step && best < 4.0 * step && std::abs(best - step) > 0.2 * step) {
          const std::vector<Vec3> x1 = m.vertices();
          double e2 = e1;
          const double merit2 = trial(best, e2);
          if (merit2 < merit1) {
            step = best;
            e1 = e2;
          } else {
            m.mutable_vertices() = x1;
          }
        }
      }
    }
    if (!accepted) {
      m.mutable_vertices() = x0;
      result.reason = Termination::LineSearchStagnation;
      std::ostringstream os;
      os << "no acceptable step above 1e-14 at iteration " << it;
      result.diagnostic = os.str();
      return result;
    }
    e0 = e1;
    if (m.min_angle() < config.smooth_below_angle && config.smoothing_sweeps > 0) {
      const std::vector<Vec3> before = m.vertices();
      try {
        tangential_smoothing(m, container, config.smoothing_sweeps);
        volume_project(m, container, target, config.volume_restore_tolerance);
        e0 = energy(m, container, betas);
        ++result.smoothing_events;
      } catch (const Error&) {
        m.mutable_vertices() = before;
      }
      d_prev.clear();
      step = -1.0;
    }
    if (m.min_angle() < config.min_angle_floor) {
      result.reason = Termination::MeshDegenerated;
      std::ostringstream os;
      os << "minimum triangle angle " << m.min_angle() * 180.0 / M_PI << " deg below floor at iteration " << it + 1;
      result.diagnostic = os.str();
      std::vector<Vec3> g1;
      std::vector<std::vector<Vec3>> c1;
      gradients(g1, c1);
      const Stationarity s1 = stationarity(m, g1, c1);
      result.lagrange_multiplier = s1.lambda;
      result.iterations = it + 1;
      result.history.push_back({it + 1, e0, (enclosed_volume(m, container) - target) / target, s1.norm, s1.lambda});
      return result;
    }
  }
}

}  // namespace capillary
