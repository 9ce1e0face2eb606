#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fairheat/compare.hpp"
#include "fairheat/metrics.hpp"
#include "support.hpp"

using namespace fairheat;

namespace {

using Vec = std::vector<double>;

// Midpoint rule on a fine grid over the linear interpolant.
double brute_discomfort(const Vec& t, const Vec& v, double T_c, double t0, double t1) {
  const int n = 200000;
  const double h = (t1 - t0) / n;
  double total = 0.0;
  std::size_t seg = 1;
  for (int k = 0; k < n; ++k) {
    const double x = t0 + (k + 0.5) * h;
    while (t[seg] < x) ++seg;
    const double f = (x - t[seg - 1]) / (t[seg] - t[seg - 1]);
    total += std::abs(T_c - (v[seg - 1] + f * (v[seg] - v[seg - 1]))) * h;
  }
  return total;
}

}  // namespace

TEST(Discomfort, Examples) {
  EXPECT_EQ(discomfort(Vec{0, 5, 10}, Vec{20, 20, 20}, 20, 0, 10), 0.0);
  EXPECT_DOUBLE_EQ(discomfort(Vec{0, 10}, Vec{19, 19}, 20, 0, 10), 10.0);
  EXPECT_DOUBLE_EQ(discomfort(Vec{0, 10}, Vec{20, 18}, 20, 0, 10), 10.0);
}

TEST(Discomfort, CrossingComfortIsExact) {
  // From 1 below to 1 above: two triangles of area 0.5 * 5 * 1.
  EXPECT_DOUBLE_EQ(discomfort(Vec{0, 10}, Vec{19, 21}, 20, 0, 10), 5.0);
  EXPECT_DOUBLE_EQ(discomfort(Vec{0, 4}, Vec{23, 19}, 20, 0, 4), 0.5 * 3 * 3 + 0.5 * 1 * 1);
}

TEST(Discomfort, SubIntervalInterpolates) {
  EXPECT_DOUBLE_EQ(discomfort(Vec{0, 10}, Vec{20, 10}, 20, 0, 5), 12.5);
  EXPECT_DOUBLE_EQ(discomfort(Vec{0, 10}, Vec{20, 10}, 20, 5, 10), 37.5);
}

TEST(Discomfort, AdditiveAndMatchesBruteForce) {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 20; ++k) {
    Vec t{0};
    Vec v{testkit::uniform(rng, 17, 23)};
    for (int i = 0; i < 30; ++i) {
      t.push_back(t.back() + testkit::uniform(rng, 0.1, 2));
      v.push_back(testkit::uniform(rng, 17, 23));
    }
    const double end = t.back();
    const double mid = testkit::uniform(rng, 0, end);
    const double whole = discomfort(t, v, 20, 0, end);
    EXPECT_NEAR(discomfort(t, v, 20, 0, mid) + discomfort(t, v, 20, mid, end), whole, 1e-10);
    EXPECT_NEAR(whole, brute_discomfort(t, v, 20, 0, end), 1e-6 * end);
  }
}

TEST(Discomfort, CoverageChecked) {
  EXPECT_THROW(discomfort(Vec{0, 10}, Vec{20, 20}, 20, 0, 11), ValidationError);
  EXPECT_THROW(discomfort(Vec{0, 10}, Vec{20, 20}, 20, -1, 10), ValidationError);
  EXPECT_THROW(discomfort(Vec{0, 10}, Vec{20}, 20, 0, 10), ValidationError);
  EXPECT_THROW(discomfort(Vec{0, 0}, Vec{20, 20}, 20, 0, 0), ValidationError);
  try {
    discomfort(Vec{0, 10}, Vec{20, 20}, 20, 0, 11);
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient coverage"), std::string::npos);
  }
}

TEST(Consumption, Examples) {
  EXPECT_DOUBLE_EQ(consumption(Vec{0, 10}, Vec{1000, 1000}), 10.0);
  EXPECT_EQ(consumption(Vec{0, 3, 10}, Vec{0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(consumption(Vec{0, 2}, Vec{0, 1000}, 0, 2), 1.0);
}

TEST(Report, RowsAndShares) {
  Metrics m;
  m.discomfort = {1, 3, 6};
  m.discomfort_total = 10;
  m.consumption = {0.1, 0.2, 0.3};
  m.consumption_total = 0.6;
  const StrategyRow r = make_row("flat", m);
  EXPECT_EQ(r.discomfort_share, (Vec{0.1, 0.3, 0.6}));
  EXPECT_DOUBLE_EQ(r.max_min_ratio, 6.0);

  m.discomfort = {0, 0, 5};
  m.discomfort_total = 5;
  EXPECT_TRUE(std::isinf(make_row("skewed", m).max_min_ratio));
  m.discomfort = {0, 0, 0};
  m.discomfort_total = 0;
  EXPECT_EQ(make_row("none", m).max_min_ratio, 1.0);
}

TEST(Report, CompareKeepsOrderAndChecksUnits) {
  SimulationResult a;
  a.unit_ids = {"a", "b"};
  a.t_end_h = 10;
  a.metrics.discomfort = {1, 2};
  a.metrics.discomfort_total = 3;
  a.metrics.consumption = {1, 1};
  SimulationResult b = a;
  const ComparisonReport rep = compare({{"x", a}, {"y", b}});
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(rep.rows[0].strategy, "x");
  EXPECT_EQ(rep.row("y").discomfort, rep.row("x").discomfort);
  EXPECT_THROW(rep.row("z"), ValidationError);

  b.unit_ids = {"a", "c"};
  EXPECT_THROW(compare({{"x", a}, {"y", b}}), ValidationError);
  b = a;
  b.t_end_h = 11;
  EXPECT_THROW(compare({{"x", a}, {"y", b}}), ValidationError);
  EXPECT_THROW(compare({}), ValidationError);
}

TEST(Report, TextAndJson) {
  SimulationResult a;
  a.unit_ids = {"u1", "u2"};
  a.t_end_h = 1;
  a.metrics.discomfort = {0, 2};
  a.metrics.discomfort_total = 2;
  a.metrics.consumption = {1, 1};
  a.metrics.consumption_total = 2;
  const ComparisonReport rep = compare({{"skewed", a}});
  std::ostringstream os;
  print_report(os, rep);
  EXPECT_NE(os.str().find("skewed"), std::string::npos);
  EXPECT_NE(os.str().find("u2"), std::string::npos);
  const auto j = report_json(rep);
  EXPECT_TRUE(j["strategies"][0]["max_min_discomfort_ratio"].is_null());
  EXPECT_EQ(j["strategies"][0]["discomfort_Ch"][1], 2.0);
}
