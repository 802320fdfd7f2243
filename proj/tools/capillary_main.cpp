#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "capillary/error.hpp"
#include "capillary/experiment.hpp"
#include "capillary/report_json.hpp"

using namespace capillary;

namespace {

void print_summary(const RunReport& r) {
  std::printf("%-24s %-46s", r.spec.name.c_str(), r.verdict.label.c_str());
  if (r.evolve) std::printf(" %s it=%d lambda=%.6g", r.evolve->reason.c_str(), r.evolve->iterations, r.evolve->lambda);
  if (r.stability) std::printf(" lambda_min=%.4e", r.stability->lambda_min);
  std::printf("\n");
  for (const auto& f : r.flags) std::printf("  flag: %s\n", f.c_str());
  for (const auto& e : r.errors) std::fprintf(stderr, "  error [%s]: %s\n", e.suite.c_str(), e.message.c_str());
}

std::vector<ExperimentSpec> prepare(const std::string& spec_path, const std::string& out,
                                    std::optional<std::uint64_t> seed) {
  auto specs = load_specs(spec_path);
  for (auto& s : specs) {
    if (seed) s.initial.seed = *seed;
    if (!out.empty()) {
      s.output_dir = specs.size() == 1 ? out : (std::filesystem::path(out) / s.name).string();
    }
  }
  return specs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capillary: volume-constrained capillary surfaces in half-spaces, wedges and balls"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, mesh_path;
  std::uint64_t seed_value = 0;
  int threads = 1;
  int levels = 0;

  auto* run = app.add_subcommand("run", "run the selected suites for every experiment in a spec file");
  run->add_option("--spec", spec_path, "experiment spec (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (one subdirectory per experiment in a batch)");
  auto* run_seed = run->add_option("--seed", seed_value, "perturbation seed override");
  run->add_option("--threads", threads, "concurrent experiments")->check(CLI::PositiveNumber);

  auto* ladder = app.add_subcommand("ladder", "refinement ladder with fitted convergence orders");
  ladder->add_option("--spec", spec_path, "experiment spec (JSON)")->required()->check(CLI::ExistingFile);
  ladder->add_option("--out", out_dir, "output directory for ladder.csv and ladder.json");
  auto* ladder_seed = ladder->add_option("--seed", seed_value, "perturbation seed override");
  ladder->add_option("--levels", levels, "number of levels in [2, 5] (default from spec)");
  ladder->add_option("--threads", threads, "concurrent ladders")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check-mesh", "validate a mesh file against a container and report its residuals");
  check->add_option("mesh", mesh_path, "mesh file (.off or .obj)")->required()->check(CLI::ExistingFile);
  check->add_option("--spec", spec_path, "spec providing the container and betas")->required()->check(CLI::ExistingFile);
  check->add_option("--out", out_dir, "output directory for report.json");

  CLI11_PARSE(app, argc, argv);
  std::optional<std::uint64_t> seed;
  if (run_seed->count() || ladder_seed->count()) seed = seed_value;

  try {
    if (*run) {
      const auto reports = run_batch(prepare(spec_path, out_dir, seed), threads);
      bool errored = false;
      for (const auto& r : reports) {
        print_summary(r);
        errored |= r.errored();
      }
      return errored ? 1 : 0;
    }
    if (*ladder) {
      auto specs = prepare(spec_path, out_dir, seed);
      std::vector<LadderTable> tables(specs.size());
      std::vector<std::string> failures(specs.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < specs.size(); i = next++) {
          try {
            tables[i] = refinement_ladder(specs[i], levels ? levels : specs[i].ladder_levels);
          } catch (const std::exception& e) {
            failures[i] = e.what();
          }
        }
      };
      std::vector<std::thread> pool;
      for (int t = 1; t < std::min<int>(threads, static_cast<int>(specs.size())); ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();
      int status = 0;
      for (std::size_t i = 0; i < specs.size(); ++i) {
        std::printf("# %s\n", specs[i].name.c_str());
        if (!failures[i].empty()) {
          std::fprintf(stderr, "error: %s\n", failures[i].c_str());
          status = 1;
          continue;
        }
        const LadderTable& t = tables[i];
        std::printf("%8s %12s", "faces", "edge");
        for (const auto& c : t.columns) std::printf(" %22s", c.c_str());
        std::printf("\n");
        for (std::size_t l = 0; l < t.values.size(); ++l) {
          std::printf("%8d %12.5e", t.faces[l], t.edge_length[l]);
          for (double v : t.values[l]) std::printf(" %22.6e", v);
          std::printf("\n");
        }
        std::printf("%8s %12s", "order", "");
        for (const auto& c : t.columns) {
          const OrderFit& o = t.orders.at(c);
          if (o.machine_zero) {
            std::printf(" %22s", "machine_zero");
          } else {
            std::printf(" %22.3f", o.order);
          }
        }
        std::printf("\n");
      }
      return status;
    }
    if (*check) {
      auto specs = load_specs(spec_path);
      ExperimentSpec s = specs.at(0);
      s.initial.kind = InitialKind::MeshFile;
      s.initial.mesh_path = mesh_path;
      s.suites = Suites{false, true, true};
      s.output_dir = out_dir;
      const RunReport r = run_experiment(s);
      auto j = to_json(r);
      j.erase("timings_s");
      std::cout << j.dump(2) << '\n';
      return r.errored() ? 1 : 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
