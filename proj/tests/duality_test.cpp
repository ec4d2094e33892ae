#include "oracles.hpp"

#include <coulomb_ot/duality.hpp>
#include <coulomb_ot/errors.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace coulomb_ot;

namespace {

std::shared_ptr<const DiscreteMeasure> uniform(int n) {
  return std::make_shared<const DiscreteMeasure>(discretize(DensitySpec::uniform_interval(1.0), n));
}

// Feasibility and tightness checked with a plain double loop.
std::pair<double, double> residuals(const PotentialPair& p, const Plan& plan, const CostModel& c) {
  double excess = -1e300, slack = 0.0;
  for (int i = 0; i < plan.source->size(); ++i)
    for (int j = 0; j < plan.target->size(); ++j) {
      const double cij = oracle::plain_cost(c, plan.source->point(i), plan.target->point(j));
      if (std::isfinite(cij)) excess = std::max(excess, p.psi[i] + p.phi[j] - cij);
    }
  for (const auto& e : plan.entries)
    slack = std::max(slack, std::abs(p.psi[e.i] + p.phi[e.j] -
                                     oracle::plain_cost(c, plan.source->point(e.i), plan.target->point(e.j))));
  return {excess, slack};
}

}  // namespace

TEST(Potentials, TwoAtoms) {
  auto mu = oracle::atoms_1d({0.0, 0.5});
  const auto c = CostModel::coulomb(1);
  auto [plan, rep] = solve_lp(mu, mu, c);
  auto p = ruschendorf_potentials(plan, c);
  EXPECT_EQ(p.psi[p.base.first], 0.0);
  EXPECT_NEAR(p.psi[0] + p.phi[1], 2.0, 1e-14);
  EXPECT_NEAR(p.psi[1] + p.phi[0], 2.0, 1e-14);
  EXPECT_TRUE(std::isinf(p.K));
}

TEST(Potentials, SingleEntry) {
  Plan plan;
  plan.source = oracle::atoms_1d({0.0});
  plan.target = oracle::atoms_1d({0.25});
  plan.entries = {{0, 0, 1.0}};
  const auto c = CostModel::coulomb(1);
  auto p = ruschendorf_potentials(plan, c);
  EXPECT_EQ(p.psi[0], 0.0);
  EXPECT_DOUBLE_EQ(p.phi[0], 4.0);
}

TEST(Potentials, FeasibleAndTightOnUniform) {
  auto mu = uniform(50);
  for (const auto& c : {CostModel::coulomb(1), CostModel::modified(1, 0.1)}) {
    auto [plan, rep] = solve_lp(mu, mu, c);
    auto p = ruschendorf_potentials(plan, c);
    auto [excess, slack] = residuals(p, plan, c);
    EXPECT_LE(excess, 1e-8);
    EXPECT_LE(slack, 1e-8);
    auto lib = dual_residuals(p, plan, c);
    EXPECT_NEAR(lib.first, excess, 1e-12);
    EXPECT_NEAR(lib.second, slack, 1e-12);
  }
}

TEST(Potentials, FeasibleOnRandomInstances) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    const int d = 1 + t % 2;
    auto mu = oracle::random_atoms(d, 12, rng);
    auto nu = oracle::random_atoms(d, 12, rng);
    const auto c = CostModel::coulomb(d);
    auto [plan, rep] = solve_lp(mu, nu, c);
    auto p = ruschendorf_potentials(plan, c);
    auto [excess, slack] = residuals(p, plan, c);
    EXPECT_LE(excess, 1e-8);
    EXPECT_LE(slack, 1e-8);
  }
}

TEST(Potentials, PsiIsTheTransformOfPhi) {
  auto mu = uniform(40);
  const auto c = CostModel::modified(1, 0.1);
  auto [plan, rep] = solve_lp(mu, mu, c);
  auto p = ruschendorf_potentials(plan, c);
  const Vector t = c_transform(p.phi, c, mu->points(), mu->points());
  EXPECT_LT((t - p.psi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Potentials, LongerChainsChangeNothing) {
  auto mu = uniform(40);
  const auto c = CostModel::coulomb(1);
  auto [plan, rep] = solve_lp(mu, mu, c);
  auto p = ruschendorf_potentials(plan, c);
  auto q = ruschendorf_potentials(plan, c, p.chain_rounds + 5);
  EXPECT_LT((p.psi - q.psi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((p.phi - q.phi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Potentials, NonMonotoneSupportThrows) {
  auto mu = oracle::atoms_1d({0.0, 0.1, 0.9, 1.0});
  Plan p;
  p.source = p.target = mu;
  p.entries = {{0, 1, 0.25}, {1, 0, 0.25}, {2, 3, 0.25}, {3, 2, 0.25}};
  try {
    ruschendorf_potentials(p, CostModel::coulomb(1));
    FAIL() << "expected NegativeCycleError";
  } catch (const NegativeCycleError& e) {
    EXPECT_GE(e.cycle().size(), 2u);
  }
}

TEST(CTransform, Examples) {
  Matrix pts(1, 2);
  pts << 0.0, 1.0;
  const auto c = CostModel::coulomb(1);
  Vector f = Vector::Ones(2);
  // the diagonal is infinite, so each atom sees only the other one: 1 - 1
  const Vector g = c_transform(f, c, pts, pts);
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
}

TEST(CTransform, DoubleTransformDominates) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int n = 2; n <= 20; ++n) {
    for (int d = 1; d <= 2; ++d) {
      auto xs = oracle::random_atoms(d, n, rng);
      auto ys = oracle::random_atoms(d, n, rng);
      const auto c = CostModel::coulomb(d);
      Vector f(n);
      for (int k = 0; k < n; ++k) f[k] = g(rng);
      const Vector fc = c_transform(f, c, ys->points(), xs->points());
      const Vector fcc = c_transform(fc, c, xs->points(), ys->points());
      for (int k = 0; k < n; ++k) EXPECT_GE(fcc[k], f[k] - 1e-12 * (1 + std::abs(f[k])));
      // one more round is idempotent
      const Vector fccc = c_transform(fcc, c, ys->points(), xs->points());
      EXPECT_LT((fccc - fc).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Semiconcavity, UniformPotentialPasses) {
  auto mu = uniform(200);
  const auto c = CostModel::modified(1, 0.9 * nonconcentration_radius(*mu, *mu, 0.5) / 2);
  auto [plan, rep] = solve_lp(mu, mu, c);
  auto p = ruschendorf_potentials(plan, c);
  auto r = semiconcavity_probe(p.psi, *mu, p.K);
  EXPECT_TRUE(r.passed()) << r.max_second_difference << " vs " << r.tolerance;
  EXPECT_GT(r.checked, 0);
}

TEST(Semiconcavity, AffineAndConvexCases) {
  auto mu = discretize(DensitySpec::uniform_interval(1.0), 64);
  Vector affine(64), bowl(64);
  const double K = 3.0;
  for (int k = 0; k < 64; ++k) {
    const double x = mu.point(k)[0];
    affine[k] = 2.0 * x - 1.0;
    bowl[k] = (K / 2 + 1) * x * x;
  }
  EXPECT_TRUE(semiconcavity_probe(affine, mu, 0.0).passed());
  EXPECT_FALSE(semiconcavity_probe(bowl, mu, K).passed());
  Matrix pts(1, 3);
  pts << 0.0, 0.3, 1.0;
  DiscreteMeasure loose(pts, Vector::Constant(3, 1.0 / 3), Vector::Constant(3, 1.0));
  EXPECT_THROW(semiconcavity_probe(Vector::Zero(3), loose, 0.0), DomainError);
}

TEST(MapFromPotential, RecoversTheShift) {
  auto mu = uniform(200);
  const auto c = CostModel::coulomb(1);
  auto [plan, rep] = solve_lp(mu, mu, c);
  auto p = ruschendorf_potentials(plan, c);
  auto table = map_from_potential(p.psi, *mu, plan);
  const double h = 1.0 / 200;
  int flagged = 0;
  for (int i = 0; i < 200; ++i) {
    if (table.flagged[i]) {
      ++flagged;
      continue;
    }
    if (table.interior[i]) EXPECT_LE(table.residual[i], 2 * h) << i;
  }
  EXPECT_LE(flagged, 6);
  EXPECT_TRUE(table.flagged[99] || table.flagged[100]);
}

TEST(MapFromPotential, ResidualShrinksWithRefinement) {
  const auto c = CostModel::coulomb(1);
  double prev = 1e300;
  for (int n : {50, 100, 200}) {
    auto mu = uniform(n);
    auto [plan, rep] = solve_lp(mu, mu, c);
    auto p = ruschendorf_potentials(plan, c);
    auto table = map_from_potential(p.psi, *mu, plan);
    // residual near x = 0.25, away from the jump and the boundary
    const double r = table.residual[n / 4];
    EXPECT_LE(r, prev + 1e-12);
    prev = r;
  }
}
