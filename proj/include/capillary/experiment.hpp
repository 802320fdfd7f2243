#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "capillary/caps.hpp"
#include "capillary/evolver.hpp"
#include "capillary/identities.hpp"
#include "capillary/sphere_fit.hpp"
#include "capillary/stability.hpp"

namespace capillary {

enum class InitialKind { ExactCap, PerturbedCap, MeshFile };
const char* to_string(InitialKind k);

struct InitialCondition {
  InitialKind kind = InitialKind::PerturbedCap;
  double amplitude = 0.05;  // relative to the cap radius
  std::uint64_t seed = 1;
  std::string mesh_path;
  int faces = 2500;         // approximate face count of generated caps
};

struct Suites {
  bool evolve = true;
  bool identities = true;
  bool stability = true;
};

/// Pass thresholds reported in the verdict; failing them is not an error.
struct Tolerances {
  double angle_deg = 1.0;
  double cmc_rel_stdev = 0.02;
  double sphericity_rms = 1e-3;
  double identity_residual = 1e-2;
  double lambda_rel = 0.02;
};

struct ExperimentSpec {
  std::string name = "experiment";
  ContainerKind container_kind = ContainerKind::HalfSpace;
  std::vector<Vec3> normals;     // outward facet normals (planar containers)
  std::vector<double> offsets;   // half-space offset; wedges pass through the origin
  std::vector<double> betas;
  std::optional<double> target_volume;
  double cap_radius = 1.0;       // used when target_volume is absent
  InitialCondition initial;
  Suites suites;
  Tolerances tolerances;
  EvolveConfig evolve;           // target_volume is filled from the spec
  std::string output_dir;
  int ladder_levels = 3;
  int ladder_finest_faces = 10000;

  Container container() const;
  /// Throws InvalidArgument or Io for inconsistent fields or missing mesh files.
  void validate() const;
};

struct EvolveSummary {
  std::string reason;
  std::string diagnostic;
  int iterations = 0;
  double energy = 0.0;
  double volume_error = 0.0;  // relative
  double grad_norm = 0.0;     // relative
  double lambda = 0.0;
  double lambda_rel_error = 0.0;  // against the reference cap H
  double min_angle_deg = 0.0;
  int smoothing_events = 0;
  double seconds = 0.0;
};

struct TestFunctionJ {
  std::string name;
  JValue j;
};

struct StabilitySummary {
  double lambda_min = 0.0;
  double residual = 0.0;
  int restarts = 0;
  double shift = 0.0;
  std::string q_branch;
  int components = 1;
  double mean_zero_defect = 0.0;  // |1^T mass zeta| of the eigenvector
  std::vector<TestFunctionJ> test_functions;
};

struct Verdict {
  std::string label;  // "sphere, theta_hat=60.00 deg +- 1.00 deg", "flat", "not spherical"
  bool sphere = false;
  bool flat = false;
  double theta_hat_deg = 0.0;
  double theta_target_deg = 0.0;
  bool angle_ok = false;
  bool cmc_ok = false;
  bool sphericity_ok = false;
  bool lambda_ok = false;
  bool identities_ok = false;
};

struct SuiteError {
  std::string suite;
  std::string message;
};

struct RunReport {
  ExperimentSpec spec;
  std::optional<CapSolution> reference;
  int vertices = 0;
  int faces = 0;
  double volume = 0.0;
  double wedge_k_norm = 0.0;
  std::optional<EvolveSummary> evolve;
  std::vector<HistoryRow> history;
  std::optional<ResidualReport> residuals;
  std::optional<YoungCmc> young_cmc;
  std::optional<PointwiseDefects> pointwise;
  std::optional<SphereFit> sphericity;
  std::optional<StabilitySummary> stability;
  Verdict verdict;
  std::vector<std::string> flags;
  std::vector<SuiteError> errors;
  std::map<std::string, double> timings;
  std::optional<TriMesh> final_mesh;

  bool errored() const { return !errors.empty(); }
};

/// Runs the selected suites. Deterministic for a fixed spec; writes report.json,
/// history.csv, final.off and final.obj when the spec names an output directory.
RunReport run_experiment(const ExperimentSpec& spec);

/// Runs independent experiments on up to `threads` workers, preserving order.
std::vector<RunReport> run_batch(const std::vector<ExperimentSpec>& specs, int threads);

struct OrderFit {
  double order = 0.0;         // log-log least-squares slope against edge length
  double log_constant = 0.0;  // |value| ~ exp(log_constant) h^order
  bool machine_zero = false;  // every value below 1e-10
};

OrderFit fit_order(const std::vector<double>& edge_lengths, const std::vector<double>& values);

struct LadderTable {
  std::vector<std::string> columns;
  std::vector<int> faces;
  std::vector<double> edge_length;
  std::vector<std::vector<double>> values;  // [level][column]
  std::map<std::string, OrderFit> orders;

  std::vector<double> column(const std::string& name) const;
};

/// Residuals on `levels` meshes whose face counts grow fourfold up to
/// spec.ladder_finest_faces. Exact-cap specs sample the cap; perturbed specs are
/// evolved at each level first. Writes ladder.csv and ladder.json when the spec
/// names an output directory.
LadderTable refinement_ladder(const ExperimentSpec& spec, int levels);

}  // namespace capillary
