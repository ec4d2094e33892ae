#include <coulomb_ot/errors.hpp>
#include <coulomb_ot/measures.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace coulomb_ot;

TEST(Discretize, UniformTwoCells) {
  auto m = discretize(DensitySpec::uniform_interval(1.0), 2);
  ASSERT_EQ(m.size(), 2);
  EXPECT_DOUBLE_EQ(m.point(0)[0], 0.25);
  EXPECT_DOUBLE_EQ(m.point(1)[0], 0.75);
  EXPECT_DOUBLE_EQ(m.weight(0), 0.5);
  EXPECT_DOUBLE_EQ(m.weight(1), 0.5);
}

TEST(Discretize, UniformFourCells) {
  auto m = discretize(DensitySpec::uniform_interval(1.0), 4);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(m.point(k)[0], 0.125 + 0.25 * k, 1e-15);
    EXPECT_NEAR(m.weight(k), 0.25, 1e-15);
  }
}

TEST(Discretize, GaussianWeightsSumToOne) {
  auto m = discretize(DensitySpec::gaussian(2, 1.0, 3.0), 16);
  EXPECT_EQ(m.size(), 256);
  EXPECT_NEAR(m.weights().sum(), 1.0, 1e-12);
  // symmetric about the origin
  EXPECT_NEAR(m.weight(0), m.weight(255), 1e-15);
}

TEST(Discretize, QuantilesHaveEqualWeights) {
  auto m = discretize_quantiles(DensitySpec::linear_ramp(1.0), 64);
  ASSERT_EQ(m.size(), 64);
  for (int k = 0; k < 64; ++k) EXPECT_NEAR(m.weight(k), 1.0 / 64, 1e-15);
  for (int k = 1; k < 64; ++k) EXPECT_GT(m.point(k)[0], m.point(k - 1)[0]);
  ASSERT_TRUE(m.grid().has_value());
  EXPECT_EQ(m.grid()->neighbor(10, 0, 1), 11);
  EXPECT_EQ(m.grid()->neighbor(63, 0, 1), -1);
  // denser cells on the heavier side
  EXPECT_LT(m.cell_volume()[63], m.cell_volume()[0]);
}

TEST(Discretize, RejectsZeroMass) {
  auto spec = DensitySpec::custom(1, Vector::Constant(1, 0.0), Vector::Constant(1, 1.0),
                                  [](const Eigen::Ref<const Vector>&) { return 0.0; }, 1.0, 0.5, 1.0);
  EXPECT_THROW(discretize(spec, 10), IntegrabilityError);
}

TEST(Measure, InvariantsEnforced) {
  Matrix pts(1, 2);
  pts << 0.0, 1.0;
  EXPECT_THROW(DiscreteMeasure(pts, Vector::Constant(2, 0.4), Vector::Constant(2, 1.0)), std::invalid_argument);
  Vector w(2);
  w << 1.5, -0.5;
  EXPECT_THROW(DiscreteMeasure(pts, w, Vector::Constant(2, 1.0)), std::invalid_argument);
  EXPECT_NO_THROW(DiscreteMeasure(pts, Vector::Constant(2, 0.5), Vector::Constant(2, 1.0)));
}

TEST(Measure, FromString) {
  auto u = measure_from_string("uniform:L=1:n=200");
  EXPECT_EQ(u.size(), 200);
  EXPECT_EQ(u.dim(), 1);
  auto g = measure_from_string("gaussian:d=2:sigma=1:L=3:n=8");
  EXPECT_EQ(g.size(), 64);
  EXPECT_EQ(g.dim(), 2);
  EXPECT_THROW(measure_from_string("nonsense:n=3"), std::invalid_argument);
}

TEST(Modulus, UniformIsIdentityOnVolumes) {
  auto m = discretize(DensitySpec::uniform_interval(1.0), 100);
  EXPECT_NEAR(modulus_abs_continuity(m, 0.3), 0.3, 1e-12);
  EXPECT_NEAR(modulus_abs_continuity(m, 0.005), 0.005, 1e-12);
  EXPECT_NEAR(modulus_abs_continuity(m, 2.0), 1.0, 1e-12);
}

TEST(Modulus, TakesDensestCellsFirst) {
  Matrix pts(1, 2);
  pts << 0.125, 0.375;
  Vector w(2);
  w << 0.75, 0.25;
  DiscreteMeasure m(pts, w, Vector::Constant(2, 0.25));
  EXPECT_NEAR(modulus_abs_continuity(m, 0.25), 0.75, 1e-15);
  EXPECT_NEAR(modulus_abs_continuity(m, 0.125), 0.375, 1e-15);
}

TEST(Modulus, NondecreasingAndConcave) {
  auto m = discretize(DensitySpec::random_holder(1, 0.5, 3), 64);
  double prev = 0.0, prev_slope = 1e300;
  for (int k = 1; k <= 64; ++k) {
    const double v = modulus_abs_continuity(m, k / 64.0);
    EXPECT_GE(v, prev - 1e-15);
    const double slope = (v - prev) * 64.0;
    EXPECT_LE(slope, prev_slope + 1e-9);
    prev = v;
    prev_slope = slope;
  }
}

TEST(Nonconcentration, UniformClosedForms) {
  auto u1 = discretize(DensitySpec::uniform_interval(1.0), 256);
  // 2 * |B_r| = 2 * 2r <= 1/2
  EXPECT_NEAR(nonconcentration_radius(u1, u1, 0.5), 0.125, 1e-6);
  auto u2 = discretize(DensitySpec::uniform_box(Vector::Zero(2), Vector::Ones(2)), 64);
  EXPECT_NEAR(nonconcentration_radius(u2, u2, 0.5), std::sqrt(1.0 / (4.0 * std::numbers::pi)), 1e-6);
}

TEST(Nonconcentration, ShrinksAsEpsGrows) {
  auto u = discretize(DensitySpec::uniform_interval(1.0), 256);
  EXPECT_GT(nonconcentration_radius(u, u, 0.3), nonconcentration_radius(u, u, 0.6));
}

TEST(Nonconcentration, ConcentratedMeasureThrows) {
  Matrix pts(1, 2);
  pts << 0.0, 1.0;
  Vector vol(2);
  vol << 1e-9, 1.0;
  Vector w(2);
  w << 0.9, 0.1;
  DiscreteMeasure m(pts, w, vol);
  EXPECT_THROW(nonconcentration_radius(m, m, 0.5), ConcentrationError);
}

TEST(BallVolume, KnownValues) {
  EXPECT_DOUBLE_EQ(ball_volume(1, 0.5), 1.0);
  EXPECT_NEAR(ball_volume(2, 1.0), std::numbers::pi, 1e-14);
  EXPECT_NEAR(ball_volume(3, 1.0), 4.0 * std::numbers::pi / 3.0, 1e-14);
}
