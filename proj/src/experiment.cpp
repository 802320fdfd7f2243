#include "capillary/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "capillary/cap_mesh.hpp"
#include "capillary/error.hpp"
#include "capillary/geometry.hpp"
#include "capillary/mesh_io.hpp"
#include "capillary/report_json.hpp"

namespace capillary {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr double kDeg = 180.0 / M_PI;

bool facets_through_origin(const ExperimentSpec& spec) {
  for (double o : spec.offsets) {
    if (o != 0.0) return false;
  }
  return true;
}

std::optional<CapSolution> reference_cap(const ExperimentSpec& spec, const Container& c) {
  const auto angles = young_angles(c);
  if (spec.target_volume) return cap_from_volume(c, angles, *spec.target_volume);
  return cap_from_radius(c, angles, spec.cap_radius);
}

/// Unit vector orthogonal to the cap axis, used for the ball test function phi_a.
Vec3 transverse_direction(const CapSolution& cap) {
  const Vec3 axis = cap.axis.normalized();
  Vec3 a = axis.cross(Vec3::UnitX());
  if (a.norm() < 0.5) a = axis.cross(Vec3::UnitY());
  return a.normalized();
}

TriMesh initial_mesh(const ExperimentSpec& spec, const Container& c, const CapSolution* cap, int faces) {
  if (spec.initial.kind == InitialKind::MeshFile) {
    MeshData data = read_mesh(spec.initial.mesh_path);
    return TriMesh::build(std::move(data.vertices), std::move(data.faces), c, 1e-9);
  }
  if (!cap) throw Error(ErrorKind::Infeasible, "no reference cap to sample");
  TriMesh m = build_cap_mesh(c, *cap, edge_length_for_faces(*cap, faces));
  if (spec.initial.kind == InitialKind::PerturbedCap && spec.initial.amplitude > 0.0) {
    perturb_mesh(m, c, spec.initial.amplitude, cap->flat() ? 1.0 : cap->radius, spec.initial.seed);
  }
  return m;
}

double theta_hat(const VertexGeometry& geom) {
  double s = 0.0;
  int n = 0;
  for (const BoundaryFrame& f : geom.boundary) {
    if (f.corner) continue;
    s += f.contact_angle;
    ++n;
  }
  return n ? s / n : 0.0;
}

ResidualReport identity_residuals(const TriMesh& mesh, const Container& c, const VertexGeometry& geom,
                                  const ExperimentSpec& spec, std::vector<std::string>& flags) {
  ResidualReport r;
  r.max_edge_length = mesh.max_edge_length();
  if (c.is_planar()) {
    if (facets_through_origin(spec)) {
      r.add("minkowski_wedge", minkowski_residual_wedge(mesh, c, geom, wedge_k(c)), "area_M");
    } else {
      flags.push_back("minkowski_wedge skipped: facet not through the origin");
    }
    r.add("divergence_position", divergence_residual(mesh, geom, AmbientField::position()), "area_M");
  } else {
    r.add("minkowski_ball", minkowski_residual_ball(mesh, c, geom), "area_M");
    r.add("divergence_conformal_killing", divergence_residual(mesh, geom, AmbientField::conformal_killing(Vec3::UnitZ())),
          "area_M");
  }
  r.add("divergence_constant", divergence_residual(mesh, geom, AmbientField::constant(Vec3::UnitZ())), "area_M");
  r.add("flux", flux_identity_residual(mesh, geom), "area_M");
  const Balancing b = balancing_residual(mesh, c, geom);
  r.balancing_per_facet = b.residual;
  double bmax = 0.0;
  for (double v : b.residual) bmax = std::max(bmax, v);
  r.add("balancing_max", bmax, b.absolute ? "absolute" : "H*wetted");
  return r;
}

StabilitySummary stability_suite(const TriMesh& mesh, const Container& c, const VertexGeometry& geom,
                                 const ExperimentSpec& spec, const CapSolution* cap, double h_used) {
  StabilitySummary s;
  const IndexForm form = assemble_index_form(mesh, c, geom, c.betas());
  const EigenResult e = min_eigenvalue_mean_zero(form);
  s.lambda_min = e.lambda_min;
  s.residual = e.residual;
  s.restarts = e.restarts;
  s.shift = e.shift;
  s.q_branch = to_string(form.q.branch);
  s.components = form.components;
  s.mean_zero_defect = std::abs((form.mass * e.eigenvector).sum());

  const int n = mesh.vertex_count();
  const auto& x = mesh.vertices();
  if (c.is_planar()) {
    if (facets_through_origin(spec)) {
      const Vec3 k = wedge_k(c).k;
      Eigen::VectorXd zeta(n);
      for (int v = 0; v < n; ++v) {
        const Vec3& nu = geom.normal[v];
        zeta(v) = 2.0 - h_used * x[v].dot(nu) + 2.0 * k.dot(nu);
      }
      s.test_functions.push_back({"zeta", evaluate_J(form, zeta)});
    }
  } else {
    const double cos_theta = c.beta(0);
    const Vec3 a = cap ? transverse_direction(*cap) : Vec3::UnitX();
    Eigen::VectorXd phi_b(n), phi_a(n);
    for (int v = 0; v < n; ++v) {
      const Vec3& nu = geom.normal[v];
      const Vec3 xa = x[v].dot(a) * x[v] - 0.5 * (x[v].squaredNorm() + 1.0) * a;
      phi_b(v) = 0.5 * (x[v].squaredNorm() - 1.0) * h_used - 2.0 * (x[v].dot(nu) + cos_theta);
      phi_a(v) = 2.0 * (x[v] + cos_theta * nu).dot(a) - h_used * xa.dot(nu);
    }
    s.test_functions.push_back({"phi_ball", evaluate_J(form, phi_b)});
    s.test_functions.push_back({"phi_a", evaluate_J(form, phi_a)});
  }
  return s;
}

void write_outputs(const RunReport& r) {
  const std::filesystem::path dir(r.spec.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  write_json((dir / "report.json").string(), to_json(r));
  write_history_csv((dir / "history.csv").string(), r.history);
  if (r.final_mesh) {
    write_off((dir / "final.off").string(), *r.final_mesh);
    write_obj((dir / "final.obj").string(), *r.final_mesh);
  }
}

}  // namespace

const char* to_string(InitialKind k) {
  switch (k) {
    case InitialKind::ExactCap: return "exact_cap";
    case InitialKind::PerturbedCap: return "perturbed_cap";
    case InitialKind::MeshFile: return "mesh_file";
  }
  return "unknown";
}

Container ExperimentSpec::container() const {
  switch (container_kind) {
    case ContainerKind::HalfSpace:
      return Container::half_space(normals.at(0), offsets.empty() ? 0.0 : offsets[0], betas.at(0));
    case ContainerKind::Wedge: return Container::wedge(normals, betas);
    case ContainerKind::Ball: return Container::unit_ball(betas.at(0));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown container kind");
}

void ExperimentSpec::validate() const {
  const std::size_t facets = container_kind == ContainerKind::Ball ? 1 : normals.size();
  if (container_kind == ContainerKind::HalfSpace && normals.size() != 1) {
    throw Error(ErrorKind::InvalidArgument, "a half-space needs exactly one facet");
  }
  if (container_kind == ContainerKind::Wedge && normals.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "a wedge needs at least two facets");
  }
  if (betas.size() != facets) throw Error(ErrorKind::InvalidArgument, "one beta per facet is required");
  if (container_kind == ContainerKind::Wedge && !facets_through_origin(*this)) {
    throw Error(ErrorKind::InvalidArgument, "wedge facets pass through the origin");
  }
  if (target_volume && !(*target_volume > 0.0)) throw Error(ErrorKind::InvalidArgument, "target_volume must be positive");
  if (!(cap_radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "cap_radius must be positive");
  if (!(initial.amplitude >= 0.0 && initial.amplitude <= 0.2)) {
    throw Error(ErrorKind::InvalidArgument, "perturbation amplitude must lie in [0, 0.2]");
  }
  if (initial.faces < 24) throw Error(ErrorKind::InvalidArgument, "initial.faces must be at least 24");
  if (initial.kind == InitialKind::MeshFile && !std::filesystem::exists(initial.mesh_path)) {
    throw Error(ErrorKind::Io, "mesh file not found: " + initial.mesh_path);
  }
  if (ladder_finest_faces < 24) throw Error(ErrorKind::InvalidArgument, "ladder finest_faces must be at least 24");
}

RunReport run_experiment(const ExperimentSpec& spec) {
  const auto t_total = Clock::now();
  RunReport r;
  r.spec = spec;
  auto guard = [&r](const char* suite, auto&& body) {
    const auto t0 = Clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      r.errors.push_back({suite, e.what()});
    }
    r.timings[suite] = seconds_since(t0);
  };

  std::optional<Container> container;
  std::optional<TriMesh> mesh;
  double target = 0.0;
  guard("construction", [&] {
    spec.validate();
    container = spec.container();
    if (container->kind() != ContainerKind::Ball) {
      try {
        r.wedge_k_norm = wedge_k(*container).norm;
      } catch (const Error& e) {
        r.flags.push_back(std::string("wedge_k unavailable: ") + e.what());
      }
      if (std::abs(r.wedge_k_norm - 1.0) < 1e-9) {
        r.flags.push_back("|k| = 1: edge case of the wedge rigidity hypothesis |k| < 1");
      }
    }
    try {
      r.reference = reference_cap(spec, *container);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Infeasible) throw;
      r.flags.push_back(std::string("no reference cap: ") + e.what());
      if (spec.initial.kind != InitialKind::MeshFile) return;
    }
    mesh = initial_mesh(spec, *container, r.reference ? &*r.reference : nullptr, spec.initial.faces);
    target = spec.target_volume ? *spec.target_volume
             : r.reference      ? r.reference->volume
                                : enclosed_volume(*mesh, *container);
  });
  if (!mesh) {
    r.timings["total"] = seconds_since(t_total);
    if (!spec.output_dir.empty()) write_outputs(r);
    return r;
  }
  const Container& c = *container;
  const CapSolution* cap = r.reference ? &*r.reference : nullptr;
  const double h_ref = cap ? cap->mean_curvature() : 0.0;
  double h_used = h_ref;

  if (spec.suites.evolve) {
    guard("evolve", [&] {
      EvolveConfig cfg = spec.evolve;
      cfg.target_volume = target;
      const auto t0 = Clock::now();
      EvolveResult res = evolve(*mesh, c, c.betas(), cfg);
      EvolveSummary s;
      s.seconds = seconds_since(t0);
      s.reason = to_string(res.reason);
      s.diagnostic = res.diagnostic;
      s.iterations = res.iterations;
      const HistoryRow& last = res.history.back();
      s.energy = last.energy;
      s.volume_error = last.volume_error;
      s.grad_norm = last.grad_norm;
      s.lambda = res.lagrange_multiplier;
      s.min_angle_deg = res.mesh.min_angle() * kDeg;
      s.smoothing_events = res.smoothing_events;
      const double area = surface_and_wetted_area(res.mesh, c).area_m;
      s.lambda_rel_error = h_ref != 0.0 ? std::abs(s.lambda - h_ref) / std::abs(h_ref)
                                        : std::abs(s.lambda) * std::sqrt(area);
      h_used = s.lambda;
      r.history = std::move(res.history);
      r.evolve = s;
      mesh = std::move(res.mesh);
    });
  }
  const TriMesh& m = *mesh;
  r.vertices = m.vertex_count();
  r.faces = m.face_count();

  std::optional<VertexGeometry> geom;
  guard("geometry", [&] {
    r.volume = enclosed_volume(m, c);
    geom = vertex_geometry(m, c);
  });
  const bool exact_sample = spec.initial.kind == InitialKind::ExactCap && !spec.suites.evolve && cap;

  if (spec.suites.identities && geom) {
    guard("identities", [&] {
      r.residuals = identity_residuals(m, c, *geom, spec, r.flags);
      r.young_cmc = young_cmc_deviation(m, c, *geom);
      r.sphericity = fit_sphere(m.vertices());
      if (exact_sample) r.pointwise = pointwise_defects(m, c, *cap, transverse_direction(*cap));
    });
  }
  if (spec.suites.stability && geom) {
    guard("stability", [&] { r.stability = stability_suite(m, c, *geom, spec, cap, h_used); });
  }

  Verdict& v = r.verdict;
  const Tolerances& tol = spec.tolerances;
  if (cap) v.theta_target_deg = cap->contact_angles.empty() ? 0.0 : cap->contact_angles[0] * kDeg;
  if (geom) v.theta_hat_deg = theta_hat(*geom) * kDeg;
  if (r.young_cmc) {
    v.angle_ok = r.young_cmc->angle_dev_max * kDeg <= tol.angle_deg;
    v.cmc_ok = r.young_cmc->cmc_rel_stdev <= tol.cmc_rel_stdev;
  }
  if (r.sphericity) {
    // A sphere so large that a plane fits within tolerance is reported flat.
    v.flat = r.sphericity->is_flat || r.sphericity->plane_rms_deviation < tol.sphericity_rms;
    v.sphere = !v.flat && r.sphericity->rms_deviation < tol.sphericity_rms;
    v.sphericity_ok = v.flat ? (cap && cap->flat()) : v.sphere;
  }
  v.lambda_ok = r.evolve ? r.evolve->lambda_rel_error <= tol.lambda_rel : false;
  if (r.residuals) {
    v.identities_ok = true;
    for (const Residual& res : r.residuals->residuals) v.identities_ok &= res.value <= tol.identity_residual;
  }
  char buf[128];
  if (v.flat) {
    std::snprintf(buf, sizeof buf, "flat, theta_hat=%.2f deg +- %.2f deg", v.theta_hat_deg, tol.angle_deg);
  } else if (v.sphere) {
    std::snprintf(buf, sizeof buf, "sphere, theta_hat=%.2f deg +- %.2f deg", v.theta_hat_deg, tol.angle_deg);
  } else if (r.sphericity) {
    std::snprintf(buf, sizeof buf, "not spherical, rms=%.3e", r.sphericity->rms_deviation);
  } else {
    std::snprintf(buf, sizeof buf, "no verdict");
  }
  v.label = buf;

  r.final_mesh = std::move(mesh);
  r.timings["total"] = seconds_since(t_total);
  if (!spec.output_dir.empty()) {
    try {
      write_outputs(r);
    } catch (const std::exception& e) {
      r.errors.push_back({"output", e.what()});
    }
  }
  return r;
}

std::vector<RunReport> run_batch(const std::vector<ExperimentSpec>& specs, int threads) {
  std::vector<RunReport> out(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) out[i] = run_experiment(specs[i]);
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(specs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& values) {
  if (h.size() != values.size() || h.size() < 2) throw Error(ErrorKind::InvalidArgument, "need two or more levels");
  OrderFit f;
  f.machine_zero = true;
  for (double v : values) f.machine_zero &= std::abs(v) < 1e-10;
  const int n = static_cast<int>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(std::max(std::abs(values[i]), 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  f.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.log_constant = (sy - f.order * sx) / n;
  return f;
}

std::vector<double> LadderTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] != name) continue;
    std::vector<double> out;
    for (const auto& row : values) out.push_back(row[c]);
    return out;
  }
  throw Error(ErrorKind::InvalidArgument, "no ladder column " + name);
}

LadderTable refinement_ladder(const ExperimentSpec& spec, int levels) {
  if (levels < 2 || levels > 5) throw Error(ErrorKind::InvalidArgument, "ladder levels must lie in [2, 5]");
  spec.validate();
  if (spec.initial.kind == InitialKind::MeshFile) {
    throw Error(ErrorKind::InvalidArgument, "a ladder needs a generated cap, not a mesh file");
  }
  const Container c = spec.container();
  const auto cap = reference_cap(spec, c);
  const bool evolve_levels = spec.suites.evolve && spec.initial.kind == InitialKind::PerturbedCap;
  LadderTable t;

  for (int l = 0; l < levels; ++l) {
    const int faces = std::max(24, spec.ladder_finest_faces >> (2 * (levels - 1 - l)));
    TriMesh m = initial_mesh(spec, c, &*cap, faces);
    double h_used = cap->mean_curvature();
    if (evolve_levels) {
      EvolveConfig cfg = spec.evolve;
      cfg.target_volume = spec.target_volume ? *spec.target_volume : cap->volume;
      EvolveResult res = evolve(std::move(m), c, c.betas(), cfg);
      h_used = res.lagrange_multiplier;
      m = std::move(res.mesh);
    }
    const VertexGeometry geom = vertex_geometry(m, c);
    std::vector<std::string> flags;
    std::vector<std::pair<std::string, double>> row;
    for (const Residual& r : identity_residuals(m, c, geom, spec, flags).residuals) row.emplace_back(r.name, r.value);
    const YoungCmc yc = young_cmc_deviation(m, c, geom);
    row.emplace_back("young_angle", yc.angle_dev_max);
    row.emplace_back("cmc_deviation", yc.cmc_rel_stdev);
    row.emplace_back("sphericity_rms", fit_sphere(m.vertices()).rms_deviation);
    if (!evolve_levels && spec.initial.kind == InitialKind::ExactCap) {
      const PointwiseDefects pd = pointwise_defects(m, c, *cap, transverse_direction(*cap));
      if (c.is_planar()) {
        row.emplace_back("zeta_l2", pd.zeta_l2);
        row.emplace_back("phi_wedge_l2", pd.phi_wedge_l2);
        row.emplace_back("zeta_robin_max", pd.zeta_robin_max);
        row.emplace_back("zeta_sup", pd.zeta_sup);
      } else {
        row.emplace_back("phi_a_l2", pd.phi_a_l2);
        row.emplace_back("phi_ball_l2", pd.phi_ball_l2);
        row.emplace_back("phi_a_robin_max", pd.phi_a_robin_max);
        row.emplace_back("phi_ball_boundary_max", pd.phi_ball_boundary_max);
        row.emplace_back("phi_ball_sup", pd.phi_ball_sup);
      }
    }
    if (spec.suites.stability) {
      const StabilitySummary s = stability_suite(m, c, geom, spec, &*cap, h_used);
      row.emplace_back("lambda_min", s.lambda_min);
      for (const auto& tf : s.test_functions) row.emplace_back("J_" + tf.name, tf.j.value);
    }
    if (l == 0) {
      for (const auto& [name, value] : row) t.columns.push_back(name);
    }
    std::vector<double> vals;
    for (const auto& [name, value] : row) vals.push_back(value);
    t.faces.push_back(m.face_count());
    t.edge_length.push_back(m.max_edge_length());
    t.values.push_back(std::move(vals));
  }
  for (const auto& name : t.columns) t.orders[name] = fit_order(t.edge_length, t.column(name));

  if (!spec.output_dir.empty()) {
    const std::filesystem::path dir(spec.output_dir);
    std::filesystem::create_directories(dir);
    write_ladder_csv((dir / "ladder.csv").string(), t);
    write_json((dir / "ladder.json").string(), to_json(t));
  }
  return t;
}

}  // namespace capillary
