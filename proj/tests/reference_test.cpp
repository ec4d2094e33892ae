#include "oracles.hpp"

#include <coulomb_ot/errors.hpp>
#include <coulomb_ot/reference.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace coulomb_ot;

TEST(UniformMap, Examples) {
  EXPECT_DOUBLE_EQ(uniform_1d_map(1.0, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(uniform_1d_map(1.0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(uniform_1d_map(1.0, 0.75), 0.25);
  EXPECT_THROW(uniform_1d_map(1.0, 1.5), DomainError);
  EXPECT_THROW(uniform_1d_map(1.0, -0.1), DomainError);
}

TEST(UniformMap, PushesUniformToItself) {
  const int n = 400, bins = 20;
  std::vector<int> hist(bins, 0);
  for (int k = 0; k < n; ++k) {
    const double y = uniform_1d_map(1.0, (k + 0.5) / n);
    hist[std::min(bins - 1, static_cast<int>(y * bins))]++;
  }
  for (int b = 0; b < bins; ++b) EXPECT_LE(std::abs(hist[b] - n / bins), 1);
}

TEST(BruteForce, Examples) {
  auto two = oracle::atoms_1d({0.0, 0.5});
  EXPECT_DOUBLE_EQ(brute_force_assignment(two, two, CostModel::coulomb(1)).second, 2.0);
  auto four = oracle::atoms_1d({0.125, 0.375, 0.625, 0.875});
  auto [plan, cost] = brute_force_assignment(four, four, CostModel::coulomb(1));
  EXPECT_NEAR(cost, 2.0, 1e-14);
  for (const auto& e : plan.entries) EXPECT_EQ(e.j, (e.i + 2) % 4);
  auto one = oracle::atoms_1d({0.0});
  auto other = oracle::atoms_1d({3.0});
  EXPECT_NEAR(brute_force_assignment(one, other, CostModel::coulomb(1)).second, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(brute_force_assignment(one, one, CostModel::coulomb(1)), InfeasibleError);
}

TEST(BruteForce, SizeLimit) {
  std::vector<double> xs(9);
  std::iota(xs.begin(), xs.end(), 0.0);
  auto m = oracle::atoms_1d(xs);
  EXPECT_THROW(brute_force_assignment(m, m, CostModel::coulomb(1)), std::exception);
}

TEST(RadialOracle, SingleShell) {
  auto o = radial_reduction_oracle({1.0}, {1.0});
  ASSERT_EQ(o.plan.size(), 1u);
  EXPECT_EQ(o.pairing, RadialPairing::kAntipodal);
  EXPECT_DOUBLE_EQ(o.cost, 0.5);
}

TEST(RadialOracle, TwoShellsAntipodal) {
  // 1/(r+s): pairing unlike radii costs 2/3 against (1/2 + 1/4)/2
  auto o = radial_reduction_oracle({1.0, 2.0}, {0.5, 0.5}, RadialPairing::kAntipodal);
  const double same = 0.5 * (1.0 / 2.0) + 0.5 * (1.0 / 4.0);
  const double cross = 1.0 / 3.0;
  EXPECT_NEAR(o.cost, std::min(same, cross), 1e-14);
}

TEST(RadialOracle, AnnulusMedianSplit) {
  const int shells = 32;
  std::vector<double> r(shells), m(shells);
  double total = 0.0;
  for (int k = 0; k < shells; ++k) {
    r[k] = 1.0 + (k + 0.5) / shells;
    m[k] = r[k];  // planar annulus: mass grows with radius
    total += m[k];
  }
  for (auto& v : m) v /= total;
  auto o = radial_reduction_oracle(r, m);
  // radius that halves the mass
  double acc = 0.0, median = r.back();
  for (int k = 0; k < shells; ++k) {
    acc += m[k];
    if (acc >= 0.5) {
      median = r[k];
      break;
    }
  }
  EXPECT_LE(std::abs(o.r_star - median), 1.0 / shells + 1e-12);
}

TEST(RadialOracle, RejectsBadTables) {
  EXPECT_THROW(radial_reduction_oracle({}, {}), std::invalid_argument);
  EXPECT_THROW(radial_reduction_oracle({2.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(radial_reduction_oracle({1.0, 2.0}, {0.5, 0.4}), std::invalid_argument);
}

TEST(RadialOracle, MassTable) {
  auto m = discretize(DensitySpec::gaussian(2, 1.0, 3.0), 24);
  auto [radii, masses] = radial_mass_table(m, Vector::Zero(2), 0.25);
  EXPECT_NEAR(std::accumulate(masses.begin(), masses.end(), 0.0), 1.0, 1e-12);
  for (size_t k = 1; k < radii.size(); ++k) EXPECT_GT(radii[k], radii[k - 1]);
}

TEST(LpConvergence, UniformMapOrderOneOverN) {
  for (int n : {50, 100, 200}) {
    auto mu = std::make_shared<const DiscreteMeasure>(discretize(DensitySpec::uniform_interval(1.0), n));
    auto plan = solve_lp(mu, mu, CostModel::coulomb(1)).first;
    const Matrix T = plan.barycentric_targets();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(T(0, i) - uniform_1d_map(1.0, mu->point(i)[0])));
    EXPECT_LE(worst, 2.0 / n) << n;
  }
}
