#include "capillary/report_json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "capillary/error.hpp"

namespace capillary {

using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 parse_vec(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  std::set<std::string> k(known.begin(), known.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!k.count(it.key())) throw Error(ErrorKind::InvalidArgument, std::string("unknown key '") + it.key() + "' in " + where);
  }
}

const char* kind_name(ContainerKind k) {
  switch (k) {
    case ContainerKind::HalfSpace: return "half_space";
    case ContainerKind::Wedge: return "wedge";
    case ContainerKind::Ball: return "ball";
  }
  return "unknown";
}

const char* shape_name(CapShape s) {
  switch (s) {
    case CapShape::SphericalCap: return "spherical_cap";
    case CapShape::Lune: return "lune";
    case CapShape::FlatDisk: return "flat_disk";
  }
  return "unknown";
}

json to_json(const CapSolution& cap) {
  json angles = json::array();
  for (double a : cap.contact_angles) angles.push_back(a * 180.0 / M_PI);
  return {{"shape", shape_name(cap.shape)},   {"center", vec(cap.center)},
          {"radius", cap.radius},             {"axis", vec(cap.axis)},
          {"polar_extent", cap.polar_extent}, {"contact_angles_deg", angles},
          {"volume", cap.volume},             {"mean_curvature", cap.mean_curvature()}};
}

json to_json(const JValue& j) { return {{"value", j.value}, {"integral", j.integral}, {"norm2", j.norm2}}; }

json to_json(const PointwiseDefects& p) {
  return {{"scale", "area-weighted RMS over interior vertices; max over Gamma"},
          {"zeta_l2", p.zeta_l2},
          {"phi_wedge_l2", p.phi_wedge_l2},
          {"phi_a_l2", p.phi_a_l2},
          {"phi_ball_l2", p.phi_ball_l2},
          {"zeta_robin_max", p.zeta_robin_max},
          {"phi_a_robin_max", p.phi_a_robin_max},
          {"phi_ball_boundary_max", p.phi_ball_boundary_max},
          {"zeta_sup", p.zeta_sup},
          {"phi_ball_sup", p.phi_ball_sup}};
}

}  // namespace

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "experiment spec must be a JSON object");
  reject_unknown(j,
                 {"name", "container", "target_volume", "cap_radius", "initial", "suites", "tolerances", "evolve",
                  "output_dir", "ladder"},
                 "experiment");
  ExperimentSpec s;
  try {
    s.name = j.value("name", s.name);
    const json& c = j.at("container");
    reject_unknown(c, {"kind", "facets", "beta"}, "container");
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "half_space" || kind == "wedge") {
      s.container_kind = kind == "wedge" ? ContainerKind::Wedge : ContainerKind::HalfSpace;
      for (const json& f : c.at("facets")) {
        reject_unknown(f, {"normal", "offset", "beta"}, "facet");
        s.normals.push_back(parse_vec(f.at("normal"), "facet normal"));
        s.offsets.push_back(f.value("offset", 0.0));
        s.betas.push_back(f.at("beta").get<double>());
      }
    } else if (kind == "ball") {
      s.container_kind = ContainerKind::Ball;
      s.betas.push_back(c.at("beta").get<double>());
    } else {
      throw Error(ErrorKind::InvalidArgument, "container kind must be half_space, wedge or ball");
    }
    if (j.contains("target_volume")) s.target_volume = j.at("target_volume").get<double>();
    s.cap_radius = j.value("cap_radius", s.cap_radius);

    if (j.contains("initial")) {
      const json& i = j.at("initial");
      reject_unknown(i, {"type", "amplitude", "seed", "path", "faces"}, "initial");
      const std::string type = i.value("type", "perturbed_cap");
      if (type == "exact_cap") {
        s.initial.kind = InitialKind::ExactCap;
      } else if (type == "perturbed_cap") {
        s.initial.kind = InitialKind::PerturbedCap;
      } else if (type == "mesh_file") {
        s.initial.kind = InitialKind::MeshFile;
      } else {
        throw Error(ErrorKind::InvalidArgument, "initial.type must be exact_cap, perturbed_cap or mesh_file");
      }
      s.initial.amplitude = i.value("amplitude", s.initial.amplitude);
      s.initial.seed = i.value("seed", s.initial.seed);
      s.initial.mesh_path = i.value("path", s.initial.mesh_path);
      s.initial.faces = i.value("faces", s.initial.faces);
    }
    if (j.contains("suites")) {
      const json& su = j.at("suites");
      if (su.is_string() && su.get<std::string>() == "all") {
        s.suites = Suites{};
      } else if (su.is_array()) {
        s.suites = Suites{false, false, false};
        for (const json& name : su) {
          const std::string n = name.get<std::string>();
          if (n == "evolve") {
            s.suites.evolve = true;
          } else if (n == "identities") {
            s.suites.identities = true;
          } else if (n == "stability") {
            s.suites.stability = true;
          } else if (n == "all") {
            s.suites = Suites{};
          } else {
            throw Error(ErrorKind::InvalidArgument, "unknown suite " + n);
          }
        }
      } else {
        throw Error(ErrorKind::InvalidArgument, "suites must be \"all\" or a list");
      }
    }
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      reject_unknown(t, {"angle_deg", "cmc_rel_stdev", "sphericity_rms", "identity_residual", "lambda_rel"},
                     "tolerances");
      s.tolerances.angle_deg = t.value("angle_deg", s.tolerances.angle_deg);
      s.tolerances.cmc_rel_stdev = t.value("cmc_rel_stdev", s.tolerances.cmc_rel_stdev);
      s.tolerances.sphericity_rms = t.value("sphericity_rms", s.tolerances.sphericity_rms);
      s.tolerances.identity_residual = t.value("identity_residual", s.tolerances.identity_residual);
      s.tolerances.lambda_rel = t.value("lambda_rel", s.tolerances.lambda_rel);
    }
    if (j.contains("evolve")) {
      const json& e = j.at("evolve");
      reject_unknown(e,
                     {"max_iterations", "gradient_tolerance", "initial_step", "shrink", "sufficient_decrease",
                      "volume_restore_tolerance", "min_angle_floor_deg", "metric", "conjugate", "normal_motion",
                      "pin_symmetries", "smooth_below_angle_deg", "smoothing_sweeps"},
                     "evolve");
      EvolveConfig& cfg = s.evolve;
      cfg.max_iterations = e.value("max_iterations", cfg.max_iterations);
      cfg.gradient_tolerance = e.value("gradient_tolerance", cfg.gradient_tolerance);
      cfg.initial_step = e.value("initial_step", cfg.initial_step);
      cfg.shrink = e.value("shrink", cfg.shrink);
      cfg.sufficient_decrease = e.value("sufficient_decrease", cfg.sufficient_decrease);
      cfg.volume_restore_tolerance = e.value("volume_restore_tolerance", cfg.volume_restore_tolerance);
      cfg.min_angle_floor = e.value("min_angle_floor_deg", cfg.min_angle_floor * 180.0 / M_PI) * M_PI / 180.0;
      const std::string metric = e.value("metric", "sobolev");
      if (metric == "sobolev") {
        cfg.metric = DescentMetric::Sobolev;
      } else if (metric == "euclidean") {
        cfg.metric = DescentMetric::Euclidean;
      } else {
        throw Error(ErrorKind::InvalidArgument, "evolve.metric must be sobolev or euclidean");
      }
      cfg.conjugate = e.value("conjugate", cfg.conjugate);
      cfg.normal_motion = e.value("normal_motion", cfg.normal_motion);
      cfg.pin_symmetries = e.value("pin_symmetries", cfg.pin_symmetries);
      cfg.smooth_below_angle =
          e.value("smooth_below_angle_deg", cfg.smooth_below_angle * 180.0 / M_PI) * M_PI / 180.0;
      cfg.smoothing_sweeps = e.value("smoothing_sweeps", cfg.smoothing_sweeps);
    }
    s.output_dir = j.value("output_dir", s.output_dir);
    if (j.contains("ladder")) {
      const json& l = j.at("ladder");
      reject_unknown(l, {"levels", "finest_faces"}, "ladder");
      s.ladder_levels = l.value("levels", s.ladder_levels);
      s.ladder_finest_faces = l.value("finest_faces", s.ladder_finest_faces);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed spec: ") + e.what());
  }
  return s;
}

json to_json(const ExperimentSpec& s) {
  json facets = json::array();
  if (s.container_kind != ContainerKind::Ball) {
    for (std::size_t i = 0; i < s.normals.size(); ++i) {
      facets.push_back({{"normal", vec(s.normals[i])},
                        {"offset", i < s.offsets.size() ? s.offsets[i] : 0.0},
                        {"beta", s.betas[i]}});
    }
  }
  json container = {{"kind", kind_name(s.container_kind)}};
  if (s.container_kind == ContainerKind::Ball) {
    container["beta"] = s.betas.empty() ? 0.0 : s.betas[0];
  } else {
    container["facets"] = facets;
  }
  json suites = json::array();
  if (s.suites.evolve) suites.push_back("evolve");
  if (s.suites.identities) suites.push_back("identities");
  if (s.suites.stability) suites.push_back("stability");
  json j = {{"name", s.name},
            {"container", container},
            {"cap_radius", s.cap_radius},
            {"initial",
             {{"type", to_string(s.initial.kind)},
              {"amplitude", s.initial.amplitude},
              {"seed", s.initial.seed},
              {"path", s.initial.mesh_path},
              {"faces", s.initial.faces}}},
            {"suites", suites},
            {"tolerances",
             {{"angle_deg", s.tolerances.angle_deg},
              {"cmc_rel_stdev", s.tolerances.cmc_rel_stdev},
              {"sphericity_rms", s.tolerances.sphericity_rms},
              {"identity_residual", s.tolerances.identity_residual},
              {"lambda_rel", s.tolerances.lambda_rel}}},
            {"evolve",
             {{"max_iterations", s.evolve.max_iterations},
              {"gradient_tolerance", s.evolve.gradient_tolerance},
              {"initial_step", s.evolve.initial_step},
              {"shrink", s.evolve.shrink},
              {"sufficient_decrease", s.evolve.sufficient_decrease},
              {"volume_restore_tolerance", s.evolve.volume_restore_tolerance},
              {"min_angle_floor_deg", s.evolve.min_angle_floor * 180.0 / M_PI},
              {"metric", s.evolve.metric == DescentMetric::Sobolev ? "sobolev" : "euclidean"},
              {"conjugate", s.evolve.conjugate},
              {"normal_motion", s.evolve.normal_motion},
              {"pin_symmetries", s.evolve.pin_symmetries},
              {"smooth_below_angle_deg", s.evolve.smooth_below_angle * 180.0 / M_PI},
              {"smoothing_sweeps", s.evolve.smoothing_sweeps}}},
            {"output_dir", s.output_dir},
            {"ladder", {{"levels", s.ladder_levels}, {"finest_faces", s.ladder_finest_faces}}}};
  if (s.target_volume) j["target_volume"] = *s.target_volume;
  return j;
}

std::vector<ExperimentSpec> load_specs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open spec " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "spec " + path + " is not valid JSON: " + e.what());
  }
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<ExperimentSpec> out;
  auto add = [&](const json& item) {
    ExperimentSpec s = spec_from_json(item);
    if (!s.initial.mesh_path.empty() && std::filesystem::path(s.initial.mesh_path).is_relative()) {
      s.initial.mesh_path = (base / s.initial.mesh_path).string();
    }
    out.push_back(std::move(s));
  };
  if (j.is_object() && j.contains("experiments")) {
    for (const json& item : j.at("experiments")) add(item);
  } else {
    add(j);
  }
  return out;
}

json to_json(const ResidualReport& r) {
  json items = json::array();
  for (const Residual& x : r.residuals) items.push_back({{"name", x.name}, {"value", x.value}, {"scale", x.scale}});
  return {{"residuals", items}, {"max_edge_length", r.max_edge_length}, {"balancing_per_facet", r.balancing_per_facet}};
}

json to_json(const SphereFit& s) {
  return {{"center", vec(s.center)},
          {"radius", s.radius},
          {"rms_deviation", s.rms_deviation},
          {"rms_scale", s.is_flat ? "diameter" : "radius"},
          {"is_flat", s.is_flat},
          {"plane_normal", vec(s.plane_normal)},
          {"plane_rms_deviation", s.plane_rms_deviation},
          {"gauss_newton_iterations", s.gauss_newton_iterations}};
}

json to_json(const RunReport& r) {
  json j = {{"schema_version", kReportSchemaVersion},
            {"spec", to_json(r.spec)},
            {"mesh", {{"vertices", r.vertices}, {"faces", r.faces}, {"volume", r.volume}}},
            {"wedge_k_norm", r.wedge_k_norm},
            {"flags", r.flags},
            {"timings_s", r.timings}};
  j["reference_cap"] = r.reference ? to_json(*r.reference) : json(nullptr);
  if (r.evolve) {
    const EvolveSummary& e = *r.evolve;
    j["evolve"] = {{"reason", e.reason},
                   {"diagnostic", e.diagnostic},
                   {"iterations", e.iterations},
                   {"energy", e.energy},
                   {"volume_error", e.volume_error},
                   {"volume_error_scale", "target_volume"},
                   {"grad_norm", e.grad_norm},
                   {"grad_norm_scale", "max(1, |lambda| sqrt(area_M))"},
                   {"lambda", e.lambda},
                   {"lambda_rel_error", e.lambda_rel_error},
                   {"lambda_rel_error_scale", "reference H (sqrt(area_M) when flat)"},
                   {"min_angle_deg", e.min_angle_deg},
                   {"smoothing_events", e.smoothing_events},
                   {"seconds", e.seconds}};
  } else {
    j["evolve"] = nullptr;
  }
  j["residuals"] = r.residuals ? to_json(*r.residuals) : json(nullptr);
  if (r.young_cmc) {
    j["young_cmc"] = {{"angle_dev_max_deg", r.young_cmc->angle_dev_max * 180.0 / M_PI},
                      {"cmc_rel_stdev", r.young_cmc->cmc_rel_stdev},
                      {"cmc_scale", r.young_cmc->flat ? "absolute*sqrt(area_M)" : "|mean H|"},
                      {"mean_curvature", r.young_cmc->mean_curvature},
                      {"flat", r.young_cmc->flat}};
  } else {
    j["young_cmc"] = nullptr;
  }
  j["pointwise"] = r.pointwise ? to_json(*r.pointwise) : json(nullptr);
  j["sphericity"] = r.sphericity ? to_json(*r.sphericity) : json(nullptr);
  if (r.stability) {
    const StabilitySummary& s = *r.stability;
    json tf = json::object();
    for (const auto& t : s.test_functions) tf[t.name] = to_json(t.j);
    j["stability"] = {{"lambda_min", s.lambda_min},
                      {"lambda_scale", "1/length^2, mass-normalised"},
                      {"residual", s.residual},
                      {"restarts", s.restarts},
                      {"shift", s.shift},
                      {"q_branch", s.q_branch},
                      {"components", s.components},
                      {"mean_zero_defect", s.mean_zero_defect},
                      {"test_functions", tf}};
  } else {
    j["stability"] = nullptr;
  }
  const Verdict& v = r.verdict;
  j["verdict"] = {{"label", v.label},
                  {"sphere", v.sphere},
                  {"flat", v.flat},
                  {"theta_hat_deg", v.theta_hat_deg},
                  {"theta_target_deg", v.theta_target_deg},
                  {"angle_ok", v.angle_ok},
                  {"cmc_ok", v.cmc_ok},
                  {"sphericity_ok", v.sphericity_ok},
                  {"lambda_ok", v.lambda_ok},
                  {"identities_ok", v.identities_ok}};
  json errors = json::array();
  for (const SuiteError& e : r.errors) errors.push_back({{"suite", e.suite}, {"message", e.message}});
  j["errors"] = errors;
  return j;
}

json to_json(const LadderTable& t) {
  json orders = json::object();
  for (const auto& [name, f] : t.orders) {
    orders[name] = {{"order", f.order}, {"log_constant", f.log_constant}, {"machine_zero", f.machine_zero}};
  }
  json rows = json::array();
  for (std::size_t l = 0; l < t.values.size(); ++l) {
    json row = {{"faces", t.faces[l]}, {"edge_length", t.edge_length[l]}};
    for (std::size_t c = 0; c < t.columns.size(); ++c) row[t.columns[c]] = t.values[l][c];
    rows.push_back(row);
  }
  return {{"schema_version", "capillary.ladder/1"}, {"rows", rows}, {"orders", orders}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path);
  std::fprintf(f, "iteration,energy,volume_error,grad_norm,lambda\n");
  for (const HistoryRow& r : rows) {
    std::fprintf(f, "%d,%.17g,%.6e,%.6e,%.17g\n", r.iteration, r.energy, r.volume_error, r.grad_norm, r.lambda);
  }
  std::fclose(f);
}

void write_ladder_csv(const std::string& path, const LadderTable& t) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path);
  std::fprintf(f, "faces,edge_length");
  for (const auto& c : t.columns) std::fprintf(f, ",%s", c.c_str());
  std::fprintf(f, "\n");
  for (std::size_t l = 0; l < t.values.size(); ++l) {
    std::fprintf(f, "%d,%.10e", t.faces[l], t.edge_length[l]);
    for (double v : t.values[l]) std::fprintf(f, ",%.10e", v);
    std::fprintf(f, "\n");
  }
  std::fprintf(f, "order,");
  for (const auto& c : t.columns) {
    const OrderFit& o = t.orders.at(c);
    if (o.machine_zero) {
      std::fprintf(f, ",machine_zero");
    } else {
      std::fprintf(f, ",%.4f", o.order);
    }
  }
  std::fprintf(f, "\n");
  std::fclose(f);
}

}  // namespace capillary
