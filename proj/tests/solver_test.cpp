#include "oracles.hpp"

#include <coulomb_ot/errors.hpp>
#include <coulomb_ot/solver.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace coulomb_ot;

namespace {

std::shared_ptr<const DiscreteMeasure> uniform(int n) {
  return std::make_shared<const DiscreteMeasure>(discretize(DensitySpec::uniform_interval(1.0), n));
}

std::set<std::pair<int, int>> support(const Plan& p) {
  std::set<std::pair<int, int>> s;
  for (const auto& e : p.entries) s.insert({e.i, e.j});
  return s;
}

}  // namespace

TEST(SolveLp, TwoAtoms) {
  auto mu = oracle::atoms_1d({0.0, 0.5});
  auto [plan, rep] = solve_lp(mu, mu, CostModel::coulomb(1));
  ASSERT_EQ(plan.entries.size(), 2u);
  EXPECT_EQ(plan.entries[0].j, 1);
  EXPECT_EQ(plan.cost_value, 2.0);
  EXPECT_LT(std::abs(rep.dual_gap), 1e-12);
}

TEST(SolveLp, SinglePair) {
  auto mu = oracle::atoms_1d({0.0});
  auto nu = oracle::atoms_1d({1.0});
  auto [plan, rep] = solve_lp(mu, nu, CostModel::coulomb(1));
  ASSERT_EQ(plan.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(plan.entries[0].mass, 1.0);
  EXPECT_DOUBLE_EQ(plan.cost_value, 1.0);
}

TEST(SolveLp, SingleAtomOnItselfIsInfeasible) {
  auto mu = oracle::atoms_1d({0.3});
  EXPECT_THROW(solve_lp(mu, mu, CostModel::coulomb(1)), InfeasibleError);
}

TEST(SolveLp, UniformShiftByHalf) {
  auto mu = uniform(200);
  auto [plan, rep] = solve_lp(mu, mu, CostModel::coulomb(1));
  EXPECT_LT((plan.row_sums() - mu->weights()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((plan.column_sums() - mu->weights()).cwiseAbs().maxCoeff(), 1e-9);
  const Matrix bary = plan.barycentric_targets();
  for (int i = 0; i < 200; ++i) {
    const double x = mu->point(i)[0];
    const double t = x <= 0.5 ? x + 0.5 : x - 0.5;
    EXPECT_LE(std::abs(bary(0, i) - t), 2.0 / 200);
  }
  EXPECT_TRUE(rep.symmetrized);
  EXPECT_LT(oracle::certificate_gap(plan, rep.source_potential, rep.target_potential, CostModel::coulomb(1)), 1e-8);
}

TEST(SolveLp, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 40; ++t) {
    const int d = 1 + t % 2, n = 2 + t % 6;
    auto mu = oracle::random_atoms(d, n, rng);
    auto nu = oracle::random_atoms(d, n, rng);
    const auto c = CostModel::coulomb(d);
    auto [plan, rep] = solve_lp(mu, nu, c);
    const double best = oracle::min_over_permutations(*mu, *nu, c);
    EXPECT_NEAR(plan.cost_value, best, 1e-12 * std::max(1.0, best)) << "trial " << t;
  }
}

TEST(SolveLp, ModifiedCostKeepsThePlan) {
  std::mt19937_64 rng(9);
  std::vector<std::pair<std::shared_ptr<const DiscreteMeasure>, std::shared_ptr<const DiscreteMeasure>>> cases;
  cases.push_back({uniform(100), uniform(100)});
  for (int k = 0; k < 5; ++k) {
    cases.push_back({std::make_shared<const DiscreteMeasure>(
                         discretize(DensitySpec::random_holder(1, 0.5, 100 + k), 64)),
                     std::make_shared<const DiscreteMeasure>(
                         discretize(DensitySpec::random_holder(1, 0.5, 200 + k), 64))});
  }
  for (const auto& [mu, nu] : cases) {
    const double r0 = nonconcentration_radius(*mu, *nu, 0.5);
    const double delta = 0.9 * r0 / 2;
    auto [p0, r0rep] = solve_lp(mu, nu, CostModel::coulomb(1));
    auto [p1, r1rep] = solve_lp(mu, nu, CostModel::modified(1, delta));
    EXPECT_EQ(support(p0), support(p1));
    EXPECT_NEAR(p0.cost_value, p1.cost_value, 1e-9);
  }
}

TEST(SolveLp, SizeLimit) {
  auto mu = uniform(50);
  LpOptions opt;
  opt.max_size = 10;
  EXPECT_THROW(solve_lp(mu, mu, CostModel::coulomb(1), opt), std::exception);
}

TEST(SolveEntropic, ApproachesLpValue) {
  auto mu = oracle::atoms_1d({0.0, 0.5});
  auto [plan, rep] = solve_entropic(mu, mu, CostModel::coulomb(1), 100.0, 1e-12);
  EXPECT_NEAR(plan.cost_value, 2.0, 1e-3);
  EXPECT_EQ(rep.method, SolveMethod::kEntropic);
}

TEST(SolveEntropic, HotKernelCostsMore) {
  auto mu = uniform(20);
  const auto c = CostModel::coulomb(1);
  auto [lp, _] = solve_lp(mu, mu, c);
  auto [ent, rep] = solve_entropic(mu, mu, c, 0.1, 1e-10);
  EXPECT_GE(ent.cost_value, lp.cost_value - 1e-12);
  EXPECT_LE(rep.marginal_error, 1e-9);
}

TEST(SolveEntropic, SinglePairExact) {
  auto [plan, rep] = solve_entropic(oracle::atoms_1d({0.0}), oracle::atoms_1d({2.0}), CostModel::coulomb(1), 5.0,
                                    1e-12);
  ASSERT_EQ(plan.entries.size(), 1u);
  EXPECT_NEAR(plan.entries[0].mass, 1.0, 1e-15);
}

TEST(SolveEntropic, ReportsNonConvergence) {
  auto mu = uniform(40);
  EntropicOptions opt;
  opt.max_iterations = 3;
  try {
    solve_entropic(mu, mu, CostModel::coulomb(1), 500.0, 1e-14, opt);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(Monotonicity, OptimalPlanHasNoViolations) {
  auto mu = uniform(50);
  const auto c = CostModel::coulomb(1);
  auto [plan, rep] = solve_lp(mu, mu, c);
  auto m = verify_c_monotonicity(plan, c, 0);
  EXPECT_EQ(m.violations, 0);
  EXPECT_GT(m.pairs_checked, 0);
}

TEST(Monotonicity, SwappedPlanIsCaught) {
  auto mu = oracle::atoms_1d({0.0, 0.1, 0.9, 1.0});
  const auto c = CostModel::coulomb(1);
  Plan p;
  p.source = p.target = mu;
  // near pairs instead of far ones
  p.entries = {{0, 1, 0.25}, {1, 0, 0.25}, {2, 3, 0.25}, {3, 2, 0.25}};
  auto m = verify_c_monotonicity(p, c, 0);
  EXPECT_GE(m.violations, 1);
  EXPECT_GT(m.worst_excess, 0.0);
  EXPECT_GE(m.witness.first, 0);
}

TEST(Monotonicity, SingleEntryTrivial) {
  Plan p;
  p.source = oracle::atoms_1d({0.0});
  p.target = oracle::atoms_1d({1.0});
  p.entries = {{0, 0, 1.0}};
  EXPECT_EQ(verify_c_monotonicity(p, CostModel::coulomb(1), 0).violations, 0);
}
