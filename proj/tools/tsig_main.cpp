// Command-line front end: scenario-driven pipeline plus the verification suite.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsig/scenario.hpp"

namespace {

tsig::Scenario load_scenario(const std::string& path) {
  if (path.empty()) return tsig::Scenario::defaults();
  return tsig::Scenario::from_json(tsig::read_file(path));
}

int run_stages(const std::string& scenario_path, const std::string& out_dir, int threads,
               const std::vector<std::string>& stages) {
  const tsig::Scenario sc = load_scenario(scenario_path);
  const auto outcome = tsig::run_scenario(sc, out_dir, threads, stages);
  for (const auto& s : outcome.stages_run) std::printf("ran      %s\n", s.c_str());
  for (const auto& s : outcome.stages_skipped) std::printf("skipped  %s (up to date)\n", s.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thin-screen scattering: spectral target signature toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", stage;
  int threads = 1;
  app.add_option("--scenario", scenario_path, "scenario JSON file (defaults built in)");
  app.add_option("--out", out_dir, "output bundle directory");
  app.add_option("--threads", threads, "concurrent lambda tasks");

  auto* cmd_run = app.add_subcommand("run", "full pipeline");
  cmd_run->add_option("--stage", stage, "run a single stage only");
  auto* cmd_mesh = app.add_subcommand("mesh", "build and write the mesh");
  auto* cmd_fwd = app.add_subcommand("forward", "far-field synthesis (incl. noisy copy)");
  auto* cmd_eigs = app.add_subcommand("eigs", "direct target-signature spectrum");
  auto* cmd_detect = app.add_subcommand("detect", "lambda sweep and peak detection");

  std::string dir_a, dir_b;
  auto* cmd_cmp = app.add_subcommand("compare", "eigenvalue drift between two bundles");
  cmd_cmp->add_option("baseline", dir_a, "baseline bundle dir")->required();
  cmd_cmp->add_option("damaged", dir_b, "damaged bundle dir")->required();

  auto* cmd_verify = app.add_subcommand("verify", "oracle verification suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed())
      return run_stages(scenario_path, out_dir, threads,
                        stage.empty() ? std::vector<std::string>{} : std::vector<std::string>{stage});
    if (cmd_mesh->parsed()) return run_stages(scenario_path, out_dir, threads, {"mesh"});
    if (cmd_fwd->parsed())
      return run_stages(scenario_path, out_dir, threads, {"mesh", "forward"});
    if (cmd_eigs->parsed()) return run_stages(scenario_path, out_dir, threads, {"mesh", "eigs"});
    if (cmd_detect->parsed())
      return run_stages(scenario_path, out_dir, threads,
                        {"mesh", "forward", "eigs", "detect"});
    if (cmd_cmp->parsed()) {
      std::printf("%s\n", tsig::compare_bundles(dir_a, dir_b).c_str());
      return 0;
    }
    if (cmd_verify->parsed()) {
      const auto rows = tsig::verify_suite();
      bool all = true;
      std::printf("%-32s %14s %12s  %s\n", "check", "measured", "tolerance", "status");
      for (const auto& r : rows) {
        std::printf("%-32s %14.6e %12.2e  %s\n", r.name.c_str(), r.measured, r.tolerance,
                    r.pass ? "pass" : "FAIL");
        all = all && r.pass;
      }
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
