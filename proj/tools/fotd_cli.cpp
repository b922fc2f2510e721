// Command-line front end: run and validate experiment configurations, and
// dump the analytic channel velocity in the ingestion format.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fotd/errors.hpp"
#include "fotd/models/reactive_transport.hpp"
#include "fotd/runner.hpp"

namespace {

void add_config_options(CLI::App& app, fotd::RunConfig& c, std::string& case_name, std::string& integrator) {
  app.add_option("--case", case_name, "rossler, ks or reactive")->required();
  app.add_option("--preset", c.preset, "named preset (rossler: desk; ks: desk, paper; reactive: desk, tiny)");
  app.add_option("--r", c.ranks, "comma-separated ranks of the sweep")->delimiter(',');
  app.add_option("--dt", c.dt, "time step");
  app.add_option("--horizon", c.horizon, "final time");
  app.add_option("--integrator", integrator, "rk4 or etdrk4 (ks defaults to etdrk4)");
  app.add_option("--stride", c.stride, "snapshot every this many steps");
  app.add_option("--extra-singulars", c.extra_singulars, "oracle singular values written beyond r");
  app.add_option("--seed", c.seed, "initial-condition seed (ks)");
  app.add_option("--padding-seed", c.padding_seed, "seed for padding rank-deficient starts");
  app.add_option("--regularization", c.regularization, "relative eigenvalue floor for C^-1");
  app.add_option("--init-resolution", c.init_resolution, "start each rank once sigma_r/sigma_1 reaches this");
  app.add_option("--coeff-times", c.coeff_times, "times for coefficient snapshots (default: final time)")
      ->delimiter(',');
  app.add_option("--ks-n", c.ks_n, "KS grid size");
  app.add_option("--grid-n1", c.grid_n1, "reactive cells along the channel");
  app.add_option("--grid-n2", c.grid_n2, "reactive cells across the channel");
  app.add_option("--velocity-file", c.velocity_file, "velocity CSV replacing the analytic field");
  app.add_flag("--with-otd-baseline", c.otd_baseline, "also evolve unforced OTD modes");
  app.add_flag("--fd-check", c.fd_check, "finite-difference check of the sensitivity equations");
  app.add_flag("!--no-oracle", c.oracle, "skip the full sensitivity oracle");
  app.add_option("--out", c.output, "output directory (relative paths honor FOTD_OUTPUT_ROOT)");
  app.add_option("--threads", c.threads, "worker threads for rank sweeps (0 = auto)");
}

void finalize(fotd::RunConfig& c, const std::string& case_name, const std::string& integrator) {
  c.kind = fotd::parse_case(case_name);
  if (!integrator.empty()) c.integrator = fotd::parse_integrator(integrator);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"f-OTD low-rank parametric sensitivities"};
  app.require_subcommand(1);

  fotd::RunConfig run_cfg;
  std::string run_case, run_integrator;
  auto* run = app.add_subcommand("run", "run an experiment sweep");
  add_config_options(*run, run_cfg, run_case, run_integrator);

  fotd::RunConfig val_cfg;
  std::string val_case, val_integrator;
  auto* val = app.add_subcommand("validate", "check a configuration without running it");
  add_config_options(*val, val_cfg, val_case, val_integrator);

  std::string vel_path;
  fotd::ReactiveConfig vel_cfg = fotd::ReactiveConfig::preset("desk");
  std::string vel_preset = "desk";
  auto* vel = app.add_subcommand("export-velocity", "write the analytic channel velocity as CSV");
  vel->add_option("path", vel_path, "output CSV")->required();
  vel->add_option("--preset", vel_preset, "reactive preset supplying the grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*vel) {
      vel_cfg = fotd::ReactiveConfig::preset(vel_preset);
      fotd::write_velocity_csv(vel_path, vel_cfg.grid, vel_cfg.velocity.sample(vel_cfg.grid));
      return 0;
    }
    if (*val) {
      finalize(val_cfg, val_case, val_integrator);
      const auto violations = fotd::validate(val_cfg);
      for (const auto& v : violations) std::cout << "violation: " << v << '\n';
      if (violations.empty()) std::cout << "ok\n";
      return violations.empty() ? 0 : 2;
    }
    finalize(run_cfg, run_case, run_integrator);
  } catch (const fotd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_configuration() ? 2 : 3;
  }

  const fotd::RunResult result = fotd::run(run_cfg);
  if (result.exit_code != 0) {
    std::cerr << "error: " << result.message << " (see " << result.output_dir << "/error.json)\n";
  } else {
    std::cout << result.output_dir << '\n';
  }
  return result.exit_code;
}
