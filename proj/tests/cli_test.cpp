#include "cli_helpers.hpp"

#include <coulomb_ot_cli/run.hpp>

#include <gtest/gtest.h>

#include <algorithm>

#include <sstream>

using namespace coulomb_ot::cli;

namespace {

int run_in_process(RunConfig cfg) {
  std::ostringstream log, err;
  return run(cfg, log, err);
}

}  // namespace

TEST(Cli, SolveWritesPlan) {
  const auto dir = clihelp::fresh_dir("solve");
  ASSERT_EQ(clihelp::run_exe("solve --spec uniform:L=1:n=200 --self --out " + dir.string()), 0);
  const auto files = clihelp::contents(dir);
  ASSERT_TRUE(files.count("plan.csv"));
  ASSERT_TRUE(files.count("report.json"));
  const auto& plan = files.at("plan.csv");
  EXPECT_EQ(plan.rfind("i,j,mass\n", 0), 0u);
  EXPECT_EQ(std::count(plan.begin(), plan.end(), '\n'), 201);
  EXPECT_NE(files.at("summary.txt").find("support_gap"), std::string::npos);
}

TEST(Cli, OutAsCsvPath) {
  const auto dir = clihelp::fresh_dir("csvpath");
  const auto target = dir / "mine.csv";
  ASSERT_EQ(clihelp::run_exe("solve --spec uniform:L=1:n=20 --self --out " + target.string()), 0);
  EXPECT_TRUE(std::filesystem::exists(target));
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
}

TEST(Cli, DeterministicArtifacts) {
  const auto a = clihelp::fresh_dir("det_a"), b = clihelp::fresh_dir("det_b");
  const std::string args = "diagnose --spec uniform:L=1:n=100 --self --seed 3 --points 4 --out ";
  ASSERT_EQ(clihelp::run_exe(args + a.string()), 0);
  ASSERT_EQ(clihelp::run_exe(args + b.string()), 0);
  const auto fa = clihelp::contents(a), fb = clihelp::contents(b);
  EXPECT_EQ(fa.size(), 5u);
  EXPECT_EQ(fa, fb);
}

TEST(Cli, VerifyLemmasPasses) {
  RunConfig cfg;
  cfg.command = Command::kVerify;
  cfg.suite = "lemmas";
  cfg.out = clihelp::fresh_dir("verify").string();
  EXPECT_EQ(run_in_process(cfg), kExitOk);
  cfg.suite = "calculus";
  EXPECT_EQ(run_in_process(cfg), kExitOk);
}

TEST(Cli, OracleAgrees) {
  RunConfig cfg;
  cfg.command = Command::kOracle;
  cfg.oracle_n = 5;
  cfg.trials = 50;
  cfg.out = clihelp::fresh_dir("oracle").string();
  EXPECT_EQ(run_in_process(cfg), kExitOk);
}

TEST(Cli, Errors) {
  EXPECT_EQ(clihelp::run_exe("solve --mu /nonexistent/file.json --self"), kExitError);
  EXPECT_EQ(clihelp::run_exe("verify --suite nonsense --out " + clihelp::fresh_dir("bad").string()), kExitError);
  EXPECT_EQ(clihelp::run_exe("frobnicate"), kExitError);
  EXPECT_EQ(clihelp::run_exe("--help"), 0);
  RunConfig cfg;
  cfg.command = Command::kSolve;
  cfg.mu_spec = "uniform:L=1:n=10";
  cfg.self = true;
  cfg.method = "simulated-annealing";
  cfg.out = clihelp::fresh_dir("badmethod").string();
  EXPECT_EQ(run_in_process(cfg), kExitError);
}
