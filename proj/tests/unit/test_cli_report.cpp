#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "capillary/error.hpp"
#include "capillary/experiment.hpp"
#include "capillary/report_json.hpp"

using namespace capillary;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json spec_json(double beta) {
  json j = json::parse(R"({"name": "hs", "container": {"kind": "half_space",
                           "facets": [{"normal": [0, 0, -1], "beta": 0.0}]},
                           "initial": {"type": "exact_cap", "faces": 600}, "suites": "all"})");
  j["container"]["facets"][0]["beta"] = beta;
  return j;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("capillary_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_spec(const fs::path& dir, const json& j) {
  const fs::path p = dir / "spec.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CAPILLARY_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json without_timings(const RunReport& r) {
  json j = to_json(r);
  j.erase("timings_s");
  if (j["evolve"].is_object()) j["evolve"].erase("seconds");
  return j;
}

}  // namespace

TEST_CASE("spec parsing") {
  const ExperimentSpec s = spec_from_json(spec_json(0.5));
  CHECK(s.container_kind == ContainerKind::HalfSpace);
  CHECK(s.betas.at(0) == 0.5);
  CHECK(s.initial.kind == InitialKind::ExactCap);
  CHECK(s.suites.evolve);
  CHECK(s.suites.stability);

  const ExperimentSpec back = spec_from_json(to_json(s));
  CHECK(to_json(back) == to_json(s));

  json bad = spec_json(0.5);
  bad["initial"]["amplitud"] = 0.1;
  CHECK_THROWS_AS(spec_from_json(bad), Error);
  json top = spec_json(0.5);
  top["volume"] = 1.0;
  CHECK_THROWS_AS(spec_from_json(top), Error);
  json metric = spec_json(0.5);
  metric["evolve"] = {{"metric", "riemannian"}};
  CHECK_THROWS_AS(spec_from_json(metric), Error);
}

TEST_CASE("spec validation") {
  json j = spec_json(0.5);
  j["initial"] = {{"type", "perturbed_cap"}, {"amplitude", -0.1}};
  try {
    spec_from_json(j).validate();
    FAIL("negative amplitude accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
  j["initial"] = {{"type", "mesh_file"}, {"path", "/nonexistent/mesh.off"}};
  try {
    spec_from_json(j).validate();
    FAIL("missing mesh accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  CHECK_THROWS_AS(load_specs("/nonexistent/spec.json"), Error);
}

TEST_CASE("runs are deterministic") {
  json j = spec_json(0.5);
  j["initial"] = {{"type", "perturbed_cap"}, {"amplitude", 0.05}, {"seed", 7}, {"faces", 600}};
  const ExperimentSpec s = spec_from_json(j);
  const RunReport a = run_experiment(s);
  const RunReport b = run_experiment(s);
  CHECK_FALSE(a.errored());
  CHECK(without_timings(a).dump() == without_timings(b).dump());
  CHECK(a.history.size() == b.history.size());
}

TEST_CASE("|k| = 1 is flagged, not silently run") {
  const json j = json::parse(R"({"name": "edge", "container": {"kind": "wedge", "facets": [
                                   {"normal": [0, 0, -1], "beta": 0.6}, {"normal": [0, -1, 0], "beta": 0.8}]},
                                 "initial": {"type": "exact_cap", "faces": 600}, "suites": "all"})");
  const RunReport r = run_experiment(spec_from_json(j));
  CHECK(r.wedge_k_norm == doctest::Approx(1.0));
  bool flagged = false;
  for (const auto& f : r.flags) flagged |= f.find("|k| = 1") != std::string::npos;
  CHECK(flagged);
  CHECK_FALSE(r.reference);
  CHECK_FALSE(r.evolve);
}

TEST_CASE("exact disk in the ball has vanishing identities") {
  const json j = json::parse(R"({"name": "disk", "container": {"kind": "ball", "beta": 0.0},
                                 "target_volume": 2.0943951023931953,
                                 "initial": {"type": "exact_cap", "faces": 2500},
                                 "suites": ["identities", "stability"]})");
  const RunReport r = run_experiment(spec_from_json(j));
  REQUIRE_FALSE(r.errored());
  REQUIRE(r.residuals);
  CHECK(r.residuals->get("balancing_max") < 1e-10);
  CHECK(r.residuals->get("divergence_constant") < 1e-10);
  CHECK(r.verdict.flat);
  REQUIRE(r.stability);
  CHECK(r.stability->q_branch == "ball");
}

TEST_CASE("exact-cap ladder") {
  json j = spec_json(0.5);
  j["ladder"] = {{"levels", 3}, {"finest_faces", 2500}};
  const ExperimentSpec s = spec_from_json(j);
  const LadderTable t = refinement_ladder(s, s.ladder_levels);
  REQUIRE(t.values.size() == 3);
  CHECK(t.orders.at("zeta_sup").machine_zero);
  CHECK(t.orders.at("flux").order >= 1.0);
  CHECK(t.orders.at("young_angle").order >= 1.0);
  for (std::size_t l = 1; l < t.edge_length.size(); ++l) CHECK(t.edge_length[l] < t.edge_length[l - 1]);
  CHECK_THROWS_AS(t.column("no_such_column"), Error);

  const OrderFit f = fit_order({0.4, 0.2, 0.1}, {0.16, 0.04, 0.01});
  CHECK(f.order == doctest::Approx(2.0));
  CHECK(std::exp(f.log_constant) == doctest::Approx(1.0));
  CHECK(fit_order({0.4, 0.2, 0.1}, {1e-13, 1e-14, 2e-13}).machine_zero);
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  const fs::path spec = write_spec(dir, spec_json(0.5));
  CHECK(run_cli("run --spec " + spec.string() + " --out " + (dir / "run").string()) == 0);
  CHECK(fs::exists(dir / "run" / "report.json"));
  CHECK(fs::exists(dir / "run" / "history.csv"));
  CHECK(fs::exists(dir / "run" / "final.off"));
  std::ifstream in(dir / "run" / "report.json");
  const json report = json::parse(in);
  CHECK(report.at("spec").at("name") == "hs");

  CHECK(run_cli("check-mesh " + (dir / "run" / "final.off").string() + " --spec " + spec.string()) == 0);
  CHECK(run_cli("ladder --spec " + spec.string() + " --levels 2") == 0);
  CHECK(run_cli("run --spec " + (dir / "missing.json").string()) != 0);
  CHECK(run_cli("frobnicate") != 0);

  json broken = spec_json(0.5);
  broken["initial"] = {{"type", "mesh_file"}, {"path", "absent.off"}};
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << broken.dump();
  CHECK(run_cli("run --spec " + bad.string()) == 1);
  std::ofstream(dir / "garbage.json") << "{not json";
  CHECK(run_cli("run --spec " + (dir / "garbage.json").string()) == 2);

  CHECK(fs::exists(fs::path(CAPILLARY_SPECS) / "rigidity.json"));
  CHECK_NOTHROW(load_specs((fs::path(CAPILLARY_SPECS) / "rigidity.json").string()));
}
