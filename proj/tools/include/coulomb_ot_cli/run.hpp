#pragma once

#include <coulomb_ot/diagnostics.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace coulomb_ot::cli {

enum class Command { kSolve, kPotentials, kDiagnose, kVerify, kOracle };

struct RunConfig {
  Command command = Command::kSolve;
  std::string mu_path, nu_path;  // measure JSON files
  std::string mu_spec, nu_spec;  // e.g. "uniform:L=1:n=200"
  bool self = false;             // nu = mu
  std::string cost = "coulomb";
  std::string method = "lp";
  double eta = 200.0;
  double tol = 1e-9;
  std::string out = ".";  // directory, or a .csv path for the plan
  std::string suite = "lemmas";
  int oracle_n = 5;
  int trials = 50;
  std::uint64_t seed = 0;
  DiagnosticsConfig diagnostics;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerificationFailed = 2;

/// Runs one command, writes its artifacts, prints a summary to `log`.
/// Errors are reported on `err` and mapped to exit code 1.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace coulomb_ot::cli
