#include "oracles.hpp"

#include <coulomb_ot/io.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace coulomb_ot;

TEST(Io, MeasureRoundTrip) {
  auto m = discretize(DensitySpec::random_holder(2, 0.5, 4), 6);
  auto back = measure_from_json(measure_to_json(m));
  EXPECT_TRUE(back.same_as(m));
  ASSERT_TRUE(back.grid().has_value());
  EXPECT_EQ(back.grid()->shape, m.grid()->shape);
}

TEST(Io, MalformedMeasure) {
  EXPECT_THROW(measure_from_json("{\"dim\": 1}"), std::invalid_argument);
  EXPECT_THROW(measure_from_json("not json"), std::invalid_argument);
}

TEST(Io, PlanCsv) {
  auto mu = oracle::atoms_1d({0.0, 0.5});
  auto plan = solve_lp(mu, mu, CostModel::coulomb(1)).first;
  std::ostringstream out;
  write_plan_csv(out, plan);
  EXPECT_EQ(out.str(), "i,j,mass\n0,1,0.5\n1,0,0.5\n");
}

TEST(Io, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Io, DiagnosticsJsonHasSchema) {
  auto mu = std::make_shared<const DiscreteMeasure>(discretize(DensitySpec::uniform_interval(1.0), 64));
  auto plan = solve_lp(mu, mu, CostModel::coulomb(1)).first;
  DiagnosticsConfig cfg;
  cfg.max_points = 2;
  auto rep = run_diagnostics(plan, cfg);
  const auto text = diagnostics_to_json(rep);
  EXPECT_NE(text.find("\"schema_version\""), std::string::npos);
  std::ostringstream sing, en;
  write_singular_csv(sing, rep, *mu);
  write_energies_csv(en, rep);
  EXPECT_EQ(sing.str().rfind("index,x0,flag_reason\n", 0), 0u);
  EXPECT_EQ(en.str().rfind("index,R,E_plus,E,D,K_R\n", 0), 0u);
}
