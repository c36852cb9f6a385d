#include <iostream>

#include <CLI11.hpp>

#include <nozzle_lf/cli.hpp>

using namespace nozzle_lf;

int main(int argc, char** argv) {
  CLI::App app{"Modified Lax-Friedrichs scheme for isentropic flow in a variable-area nozzle"};
  app.require_subcommand(1);

  std::string config_path, out_dir, mode;
  long stride = 0;
  double dx = 0.0, t_final = -1.0;
  auto add_run_flags = [&](CLI::App* sub, bool outputs) {
    sub->add_option("--config", config_path, "Key-value config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--dx", dx, "Mesh width (overrides the config)")->check(CLI::PositiveNumber);
    sub->add_option("--t-final", t_final, "Final time (overrides the config)")->check(CLI::NonNegativeNumber);
    if (!outputs) return;
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--mode", mode, "Scheme")->check(CLI::IsMember({"modified", "baseline-lf"}));
    sub->add_option("--stride", stride, "Snapshot every N steps")->check(CLI::PositiveNumber);
  };

  auto* run = app.add_subcommand("run", "Run the scheme and write snapshots, energy series and audit");
  add_run_flags(run, true);
  auto* validate = app.add_subcommand("validate", "Check the geometry and bound function admissibility");
  add_run_flags(validate, false);

  auto* riemann = app.add_subcommand("riemann", "Solve one Riemann problem and sample it");
  cli::RiemannRequest req;
  double rho_l = 1.0, v_l = 0.0, rho_r = 1.0, v_r = 0.0, x_min = 0.0, x_max = 0.0;
  riemann->add_option("--rho-left", rho_l)->required();
  riemann->add_option("--v-left", v_l);
  riemann->add_option("--rho-right", rho_r)->required();
  riemann->add_option("--v-right", v_r);
  riemann->add_option("--gamma", req.gamma);
  riemann->add_option("--t", req.t, "Sample time");
  riemann->add_option("--samples", req.samples, "Number of sample points");
  auto* xmin_opt = riemann->add_option("--x-min", x_min);
  auto* xmax_opt = riemann->add_option("--x-max", x_max);

  CLI11_PARSE(app, argc, argv);

  try {
    if (riemann->parsed()) {
      req.left = {rho_l, rho_l * v_l};
      req.right = {rho_r, rho_r * v_r};
      if (*xmin_opt) req.x_min = x_min;
      if (*xmax_opt) req.x_max = x_max;
      cli::cmd_riemann(req, std::cout);
      return 0;
    }
    auto cfg = cli::parse_config(config_path);
    if (dx > 0.0) cfg.dx = dx;
    if (t_final >= 0.0) cfg.T = t_final;
    if (!out_dir.empty()) cfg.out = out_dir;
    if (!mode.empty()) cfg.mode = cli::parse_mode(mode);
    if (stride > 0) cfg.stride = stride;
    cli::check(cfg);
    if (validate->parsed()) return cli::cmd_validate(cfg, std::cout) ? 0 : 1;
    return cli::cmd_run(cfg, std::cout).exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
