#include "coulomb_ot_cli/run.hpp"

#include <CLI11.hpp>

#include <iostream>

using coulomb_ot::cli::Command;
using coulomb_ot::cli::RunConfig;

namespace {

void add_marginal_flags(CLI::App* app, RunConfig& cfg) {
  app->add_option("--mu,--measure", cfg.mu_path, "source measure JSON");
  app->add_option("--nu", cfg.nu_path, "target measure JSON");
  app->add_option("--spec", cfg.mu_spec, "built-in source, e.g. uniform:L=1:n=200");
  app->add_option("--nu-spec", cfg.nu_spec, "built-in target");
  app->add_flag("--self", cfg.self, "use the source as target");
  app->add_option("--cost", cfg.cost, "coulomb | modified:delta=X")->capture_default_str();
  app->add_option("--method", cfg.method, "lp | entropic")->capture_default_str();
  app->add_option("--eta", cfg.eta, "entropic inverse temperature")->capture_default_str();
  app->add_option("--tol", cfg.tol, "entropic marginal tolerance")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-marginal optimal transport with Coulomb cost"};
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--out", cfg.out, "output directory, or .csv path for the plan")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "optimal plan");
  add_marginal_flags(solve, cfg);
  auto* pot = app.add_subcommand("potentials", "Kantorovich potentials from the plan");
  add_marginal_flags(pot, cfg);
  auto* diag = app.add_subcommand("diagnose", "regularity diagnostics");
  add_marginal_flags(diag, cfg);
  diag->add_option("--theta", cfg.diagnostics.jump_theta, "jump threshold factor")->capture_default_str();
  diag->add_option("--points", cfg.diagnostics.max_points, "number of examined atoms")->capture_default_str();
  diag->add_option("--radii", cfg.diagnostics.radii, "local radii");
  diag->add_flag("--flag-failed-checks", cfg.diagnostics.flag_failed_checks,
                 "add failed normalization or displacement checks to the singular set");
  auto* verify = app.add_subcommand("verify", "named invariant checks");
  verify->add_option("--suite", cfg.suite, "lemmas | calculus | all")->capture_default_str();
  auto* oracle = app.add_subcommand("oracle", "LP against exhaustive assignment");
  oracle->add_option("--n", cfg.oracle_n, "atoms per side (<= 8)")->capture_default_str();
  oracle->add_option("--trials", cfg.trials, "random instances")->capture_default_str();

  for (auto* sub : {solve, pot, diag, verify, oracle}) {
    sub->add_option("--out", cfg.out, "output directory, or .csv path for the plan");
    sub->add_option("--seed", cfg.seed, "random seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*solve) cfg.command = Command::kSolve;
  if (*pot) cfg.command = Command::kPotentials;
  if (*diag) cfg.command = Command::kDiagnose;
  if (*verify) cfg.command = Command::kVerify;
  if (*oracle) cfg.command = Command::kOracle;
  return coulomb_ot::cli::run(cfg, std::cout, std::cerr);
}
