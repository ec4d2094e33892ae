#include "coulomb_ot_cli/run.hpp"

#include <coulomb_ot/errors.hpp>
#include <coulomb_ot/io.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

namespace coulomb_ot::cli {

namespace fs = std::filesystem;

namespace {

using MeasurePtr = std::shared_ptr<const DiscreteMeasure>;

struct Outputs {
  fs::path dir;
  fs::path plan;
  fs::path file(const std::string& name) const { return dir / name; }
};

Outputs resolve_outputs(const std::string& out) {
  Outputs o;
  fs::path p(out.empty() ? "." : out);
  if (p.extension() == ".csv") {
    o.dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    o.plan = p;
  } else {
    o.dir = p;
    o.plan = p / "plan.csv";
  }
  fs::create_directories(o.dir);
  return o;
}

MeasurePtr load(const std::string& path, const std::string& spec) {
  if (!path.empty()) {
    if (!fs::exists(path)) throw std::runtime_error("measure file not found: " + path);
    return std::make_shared<const DiscreteMeasure>(load_measure(path));
  }
  if (!spec.empty()) return std::make_shared<const DiscreteMeasure>(measure_from_string(spec));
  return nullptr;
}

std::pair<MeasurePtr, MeasurePtr> marginals(const RunConfig& cfg) {
  MeasurePtr mu = load(cfg.mu_path, cfg.mu_spec);
  if (!mu) throw std::invalid_argument("no source measure: pass --mu or --spec");
  if (cfg.self) return {mu, mu};
  MeasurePtr nu = load(cfg.nu_path, cfg.nu_spec);
  if (!nu) throw std::invalid_argument("no target measure: pass --nu, --nu-spec or --self");
  return {mu, nu};
}

std::pair<Plan, SolveReport> solve(const RunConfig& cfg, const MeasurePtr& mu, const MeasurePtr& nu,
                                   const CostModel& c) {
  if (cfg.method == "lp") return solve_lp(mu, nu, c);
  if (cfg.method == "entropic") return solve_entropic(mu, nu, c, cfg.eta, cfg.tol);
  throw std::invalid_argument("unknown method '" + cfg.method + "'");
}

void write_plan(const Outputs& o, const Plan& plan) {
  std::ofstream out(o.plan, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + o.plan.string());
  write_plan_csv(out, plan);
}

void finish(const Outputs& o, const std::string& summary, std::ostream& log) {
  write_text_file(o.file("summary.txt").string(), summary);
  log << summary;
}

std::string line(const std::string& key, double v) { return key + " " + format_double(v) + "\n"; }

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  const auto [mu, nu] = marginals(cfg);
  const CostModel c = CostModel::parse(cfg.cost, mu->dim());
  const Outputs o = resolve_outputs(cfg.out);
  auto [plan, rep] = solve(cfg, mu, nu, c);
  write_plan(o, plan);
  write_text_file(o.file("report.json").string(), report_to_json(rep));
  std::string s = "command solve\ncost " + c.describe() + "\nmethod " + to_string(rep.method) + "\n";
  s += "entries " + std::to_string(plan.entries.size()) + "\n";
  s += line("primal_cost", rep.primal_cost) + line("dual_gap", rep.dual_gap) + line("support_gap", support_gap(plan));
  finish(o, s, log);
  return kExitOk;
}

int cmd_potentials(const RunConfig& cfg, std::ostream& log) {
  const auto [mu, nu] = marginals(cfg);
  const CostModel c = CostModel::parse(cfg.cost, mu->dim());
  const Outputs o = resolve_outputs(cfg.out);
  auto [plan, rep] = solve(cfg, mu, nu, c);
  const auto pot = ruschendorf_potentials(plan, c);
  const auto [feas, slack] = dual_residuals(pot, plan, c);
  write_plan(o, plan);
  write_text_file(o.file("potentials.json").string(), potentials_to_json(pot));
  std::string s = "command potentials\ncost " + c.describe() + "\n";
  s += line("K", pot.K) + line("max_dual_excess", feas) + line("max_support_slack", slack);
  s += "chain_rounds " + std::to_string(pot.chain_rounds) + "\n";
  finish(o, s, log);
  return kExitOk;
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& log) {
  const auto [mu, nu] = marginals(cfg);
  const CostModel c = CostModel::parse(cfg.cost, mu->dim());
  const Outputs o = resolve_outputs(cfg.out);
  auto [plan, rep] = solve(cfg, mu, nu, c);
  const auto diag = run_diagnostics(plan, cfg.diagnostics);
  write_plan(o, plan);
  write_text_file(o.file("diagnostics.json").string(), diagnostics_to_json(diag));
  {
    std::ofstream out(o.file("singular.csv"), std::ios::binary);
    write_singular_csv(out, diag, *mu);
  }
  {
    std::ofstream out(o.file("energies.csv"), std::ios::binary);
    write_energies_csv(out, diag);
  }
  int accepted = 0;
  for (const auto& p : diag.points) accepted += p.normalization.accepted ? 1 : 0;
  std::string s = "command diagnose\n" + line("support_gap", diag.support_gap) + line("r0", diag.r0) +
                  line("delta", diag.delta);
  s += "support_gap_ok " + std::string(diag.support_gap_ok ? "true" : "false") + "\n";
  s += "points " + std::to_string(diag.points.size()) + " accepted " + std::to_string(accepted) + "\n";
  s += "singular " + std::to_string(diag.singular.size()) + "\n";
  finish(o, s, log);
  return kExitOk;
}

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

std::vector<Check> lemma_suite() {
  std::vector<Check> out;
  const int n = 200;
  const auto mu = std::make_shared<const DiscreteMeasure>(discretize(DensitySpec::uniform_interval(1.0), n));
  const auto [plan, rep] = solve_lp(mu, mu, CostModel::coulomb(1));
  const double gap = support_gap(plan);
  const double r0 = nonconcentration_radius(*mu, *mu, 0.5);
  const double delta = 0.9 * r0 / 2.0;
  out.push_back({"support", std::abs(gap - 0.5) <= 2.0 / n && gap > delta,
                 "gap " + format_double(gap) + " delta " + format_double(delta)});

  const auto mono = verify_c_monotonicity(plan, CostModel::coulomb(1), 0);
  out.push_back({"monotonicity", mono.violations == 0, std::to_string(mono.violations) + " violations"});

  const CostModel cd = CostModel::modified(1, delta);
  const auto [plan_d, rep_d] = solve_lp(mu, mu, cd);
  bool same = plan_d.entries.size() == plan.entries.size();
  for (std::size_t k = 0; same && k < plan.entries.size(); ++k) {
    same = plan.entries[k].i == plan_d.entries[k].i && plan.entries[k].j == plan_d.entries[k].j;
  }
  const bool costs = std::abs(plan.cost_value - plan_d.cost_value) <= 1e-9;
  out.push_back({"cost_invariance", same && costs, same ? "supports agree" : "supports differ"});

  const auto pot = ruschendorf_potentials(plan, cd);
  const auto [feas, slack] = dual_residuals(pot, plan, cd);
  out.push_back({"duality", feas <= 1e-8 && slack <= 1e-8,
                 "excess " + format_double(feas) + " slack " + format_double(slack)});

  const auto sc = semiconcavity_probe(pot.psi, *mu, pot.K);
  out.push_back({"semiconcavity", sc.passed(), std::to_string(sc.violations) + " violations"});

  const auto flags = detect_singular_set(plan, 5.0);
  bool exact = flags.size() == 2;
  for (const auto& f : flags) exact = exact && std::abs(mu->point(f.index)[0] - 0.5) < 1.0 / n;
  out.push_back({"singular_set", exact, std::to_string(flags.size()) + " flagged"});

  int total = 0, ok = 0;
  for (int i = 2; i < n - 2; ++i) {
    if (std::abs(mu->point(i)[0] - 0.5) < 0.05 * 0.5) continue;
    ++total;
    ok += build_normalization(plan, pot, cd, i).accepted ? 1 : 0;
  }
  out.push_back({"normalization", ok >= 0.9 * total, std::to_string(ok) + "/" + std::to_string(total)});

  // Random Holder marginal: the plan avoids the fattened diagonal.
  const auto h = std::make_shared<const DiscreteMeasure>(discretize(DensitySpec::random_holder(1, 0.5, 7), 128));
  const auto [plan_h, rep_h] = solve_lp(h, h, CostModel::coulomb(1));
  const double delta_h = 0.9 * nonconcentration_radius(*h, *h, 0.5) / 2.0;
  out.push_back({"support_holder", support_gap(plan_h) > delta_h,
                 "gap " + format_double(support_gap(plan_h)) + " delta " + format_double(delta_h)});
  return out;
}

std::vector<Check> calculus_suite() {
  std::vector<Check> out;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d) {
    Vector x(d), y(d);
    for (int a = 0; a < d; ++a) {
      x[a] = u(rng);
      y[a] = x[a] + 0.7 + 0.1 * a;
    }
    const double r = (x - y).norm();
    const double det = det_mixed_hessian(CostModel::coulomb(d), x, y);
    worst = std::max(worst, std::abs(det + 2.0 / std::pow(r, 3 * d)) / (2.0 / std::pow(r, 3 * d)));
  }
  out.push_back({"det_mixed_hessian", worst <= 1e-9, "rel err " + format_double(worst)});
  const CostModel c = CostModel::modified(1, 0.1);
  const double d2l = c.d2h(0.1 * (1 - 1e-9)), d2r = c.d2h(0.1 * (1 + 1e-9));
  out.push_back({"c2_matching", std::abs(d2l - d2r) <= 1e-6 / std::pow(0.1, 3), "jump " + format_double(d2l - d2r)});
  return out;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const Outputs o = resolve_outputs(cfg.out);
  std::vector<Check> checks;
  if (cfg.suite == "lemmas") {
    checks = lemma_suite();
  } else if (cfg.suite == "calculus") {
    checks = calculus_suite();
  } else if (cfg.suite == "all") {
    checks = lemma_suite();
    for (auto& c : calculus_suite()) checks.push_back(std::move(c));
  } else {
    throw std::invalid_argument("unknown suite '" + cfg.suite + "'");
  }
  std::string s = "command verify\nsuite " + cfg.suite + "\n";
  int failed = 0;
  for (const auto& c : checks) {
    s += (c.passed ? "PASS " : "FAIL ") + c.name + " (" + c.detail + ")\n";
    failed += c.passed ? 0 : 1;
  }
  s += failed ? "failed " + std::to_string(failed) + "\n" : "all checks passed\n";
  finish(o, s, log);
  return failed ? kExitVerificationFailed : kExitOk;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& log) {
  if (cfg.oracle_n < 1 || cfg.oracle_n > 8) throw std::invalid_argument("--n must lie in [1, 8]");
  const Outputs o = resolve_outputs(cfg.out);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::ostringstream csv;
  csv << "trial,dim,lp_cost,brute_cost,agree\n";
  int agree = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    const int d = 1 + t % 2;
    const int n = cfg.oracle_n;
    auto random_measure = [&] {
      Matrix pts(d, n);
      for (int k = 0; k < n; ++k) {
        for (int a = 0; a < d; ++a) pts(a, k) = u(rng);
      }
      return std::make_shared<const DiscreteMeasure>(pts, Vector::Constant(n, 1.0 / n), Vector::Constant(n, 1.0));
    };
    const auto mu = random_measure();
    const auto nu = random_measure();
    const CostModel c = CostModel::coulomb(d);
    const double lp = solve_lp(mu, nu, c).first.cost_value;
    const double bf = brute_force_assignment(mu, nu, c).second;
    const bool ok = std::abs(lp - bf) <= 1e-12 * std::max(1.0, std::abs(bf));
    agree += ok ? 1 : 0;
    csv << t << ',' << d << ',' << format_double(lp) << ',' << format_double(bf) << ',' << (ok ? 1 : 0) << '\n';
  }
  write_text_file(o.file("oracle.csv").string(), csv.str());
  std::string s = "command oracle\nagreement " + std::to_string(agree) + "/" + std::to_string(cfg.trials) + "\n";
  finish(o, s, log);
  return agree == cfg.trials ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::kSolve:
        return cmd_solve(config, log);
      case Command::kPotentials:
        return cmd_potentials(config, log);
      case Command::kDiagnose:
        return cmd_diagnose(config, log);
      case Command::kVerify:
        return cmd_verify(config, log);
      case Command::kOracle:
        return cmd_oracle(config, log);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace coulomb_ot::cli
