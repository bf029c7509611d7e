#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "whf/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Wiener-Hopf factorization of branch-commutative 2x2 matrices by the two-ODE method"};
  app.set_version_flag("--version", "factorize 0.1.0");

  whf::RunConfig run;
  std::string config, out, dump, report;
  double L = 0.0;
  std::size_t steps = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "problem file (key = value)")->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "output path (default: stdout)");
    cmd->add_option("--L", L, "truncation height of the b-descent (overrides the problem file)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--steps", steps, "number of RK4 steps N_b (overrides the problem file)");
    cmd->add_option("--trajectory-dump", dump, "write the ODE2 trajectory as CSV");
    cmd->add_option("--report", report, "write the JSON validation report here");
    cmd->add_option("--threads", run.threads, "worker threads for ODE1 (0 = all cores)");
  };

  add_common(&app);
  app.add_option("--format", run.format, "result format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--validate", run.validate, "also run the validation checks");
  app.add_flag("--b-invariance", run.b_invariance, "compare against a second commutant");

  CLI::App* validate = app.add_subcommand("validate", "run the validation suite only");
  add_common(validate);
  validate->add_flag("--b-invariance", run.b_invariance, "compare against a second commutant");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : whf::kExitBadInput;
  }

  if (config.empty()) {
    std::cerr << "error: --config is required\n";
    return whf::kExitBadInput;
  }
  run.config = config;
  if (!out.empty()) run.out = out;
  if (!dump.empty()) run.trajectory_dump = dump;
  if (!report.empty()) run.report = report;
  if (L > 0.0) run.L = L;
  if (steps > 0) run.steps = steps;

  if (validate->parsed()) return whf::run_validate(run, std::cout, std::cerr);
  return whf::run_factorize(run, std::cout, std::cerr);
}
