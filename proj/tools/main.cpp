#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "fbflow/cli.hpp"

namespace {

void add_shared_options(CLI::App* cmd, fbflow::cli::RunConfig& cfg,
                        std::string& config_path) {
  // frees the short -h so the relaxation parameter can use --h
  cmd->set_help_flag("--help", "Print this help message and exit");
  cmd->add_option("--problem", cfg.problem,
                  "Gallery name, inline JSON spec, or @file.json");
  cmd->add_option("--h", cfg.h, "Relaxation / step parameter");
  cmd->add_option("--mu", cfg.mu, "Prox parameter (default: beta)");
  cmd->add_option("--dt", cfg.dt, "Flow time step");
  cmd->add_option("--horizon", cfg.horizon, "Flow integration horizon");
  cmd->add_option("--method", cfg.method, "Integrator: rk4 | explicit-euler");
  cmd->add_option("--tol", cfg.tol, "Convergence tolerance on the residual");
  cmd->add_option("--max-iters", cfg.max_iters, "Iteration cap");
  cmd->add_option("--seed", cfg.seed, "Seed for the generated start point");
  cmd->add_option("--x0", cfg.x0, "Start point as comma-separated values");
  cmd->add_flag("--override-admissibility", cfg.override_admissibility,
                "Run despite inadmissible parameters (recorded as a warning)");
  cmd->add_option("--csv", cfg.csv, "CSV output path (compare: path prefix)");
  cmd->add_option("--json", cfg.json_path, "JSON summary output path");
  cmd->add_option("--record-every", cfg.record_every,
                  "Record every n-th iterate");
  cmd->add_option("--config", config_path,
                  "Flat key = value config file; command-line flags "
                  "override file values");
}

// config keys only fill fields whose flag is absent from the command line
void merge_config(CLI::App* cmd, fbflow::cli::RunConfig& cfg,
                  const std::string& config_path) {
  if (config_path.empty()) return;
  fbflow::cli::apply_config_file(cfg, config_path, [&](const std::string& k) {
    const CLI::Option* op = cmd->get_option_no_throw("--" + k);
    return op != nullptr && op->count() > 0;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solvers for structured monotone inclusions: splitting "
               "iterations and their continuous-time flows"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  std::string filter;
  CLI::App* list = app.add_subcommand("list", "List the problem gallery");
  list->add_option("--filter", filter, "Substring filter on entry names");

  fbflow::cli::RunConfig solve_cfg;
  std::string solve_config;
  CLI::App* solve = app.add_subcommand("solve", "Run one scheme");
  solve->add_option("--scheme", solve_cfg.scheme,
                    "fbn | fb-classical | fb-relaxed | newton-flow | "
                    "semigroup-flow | prox-grad-flow");
  add_shared_options(solve, solve_cfg, solve_config);

  fbflow::cli::RunConfig cmp_cfg;
  std::string cmp_config;
  CLI::App* compare =
      app.add_subcommand("compare", "Run several schemes on one problem");
  compare->add_option("--schemes", cmp_cfg.schemes,
                      "Comma-separated scheme list "
                      "(default fbn,fb-classical,fb-relaxed)");
  add_shared_options(compare, cmp_cfg, cmp_config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (list->parsed()) return fbflow::cli::cmd_list(filter, std::cout);
    if (solve->parsed()) {
      merge_config(solve, solve_cfg, solve_config);
      return fbflow::cli::cmd_solve(solve_cfg, std::cout);
    }
    merge_config(compare, cmp_cfg, cmp_config);
    return fbflow::cli::cmd_compare(cmp_cfg, std::cout);
  } catch (const fbflow::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
