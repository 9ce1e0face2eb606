#include <gtest/gtest.h>

#include <random>

#include "fairheat/bundled.hpp"
#include "fairheat/control.hpp"
#include "support.hpp"

using namespace fairheat;

namespace {

UnitParams unit(std::size_t i) { return table1_units()[i]; }

}  // namespace

TEST(Feedforward, HeatingCurve) {
  EXPECT_DOUBLE_EQ(feedforward(0, unit(0)), 50.8);
  EXPECT_NEAR(feedforward(-10, unit(0)), 35.4, 1e-12);
  EXPECT_NEAR(feedforward(10, unit(1)), 71.9, 1e-12);
}

TEST(DesiredLoad, ProportionalAndClamped) {
  UnitParams p = unit(0);
  ControlOutput o = desired_load(50, 50, p);
  EXPECT_DOUBLE_EQ(o.P_tilde, 0.0);
  EXPECT_FALSE(o.clamped);
  o = desired_load(49, 50, p);
  EXPECT_DOUBLE_EQ(o.P_tilde, 100.0);
  EXPECT_FALSE(o.clamped);
  o = desired_load(51, 50, p);
  EXPECT_DOUBLE_EQ(o.P_tilde, 0.0);
  EXPECT_TRUE(o.clamped);
}

TEST(DesiredLoad, ControlUsesCurve) {
  const UnitParams p = unit(0);
  const ControlOutput o = control({20, 30}, -10, p);
  EXPECT_NEAR(o.T_hs_ref, 35.4, 1e-12);
  EXPECT_NEAR(o.P_tilde, 540.0, 1e-9);
}

TEST(Tuning, ResidualAsPrinted) {
  EXPECT_NEAR(well_tuned_residual(unit(0)), 52242.76, 1e-8);
  EXPECT_NEAR(well_tuned_residual(unit(1)), 50582.8, 1e-8);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_FALSE(is_well_tuned(unit(i)));
}

TEST(Tuning, A1ClosedForm) {
  EXPECT_NEAR(tune_a1(unit(0)), -24301.0 / 18144.0, 1e-15);
  EXPECT_NEAR(tune_a1(unit(0)), -1.3393, 1e-4);
  EXPECT_NEAR(tune_a1(unit(2)), -50545.0 / 28818.0, 1e-15);
  EXPECT_NEAR(tune_a1(unit(2)), -1.7539, 1e-4);
}

TEST(Tuning, A1ZeroesResidualForBundledUnits) {
  for (std::size_t i = 0; i < 3; ++i) {
    UnitParams p = unit(i);
    p.a1 = tune_a1(p);
    EXPECT_LE(std::abs(well_tuned_residual(p)), 1e-12) << p.unit_id;
    EXPECT_TRUE(is_well_tuned(p));
  }
}

TEST(Tuning, A1ResidualAtRoundingLevel) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 2000; ++k) {
    UnitParams p = testkit::random_physical(rng);
    p.a1 = tune_a1(p);
    const double scale = 1 + p.k_p * p.eta * p.R_hs;
    EXPECT_LE(std::abs(well_tuned_residual(p)), 2 * scale * 0x1p-52);
  }
}

TEST(Tuning, A0) {
  UnitParams p = unit(0);
  p.a1 = tune_a1(p);
  EXPECT_NEAR(tune_a0(p, 20), 20.0 * 42445.0 / 18144.0, 1e-12);
  EXPECT_NEAR(tune_a0(p, 20), 46.79, 5e-3);
  EXPECT_DOUBLE_EQ(tune_a0(p, 0), 0.0);
}

TEST(Tuning, A0RequiresTunedA1) {
  EXPECT_THROW(tune_a0(unit(0), 20), ValidationError);
}

TEST(Tuning, TunedHoldsComfortAtAnyOutdoorTemperature) {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 200; ++k) {
    const double T_c = testkit::uniform(rng, 18, 23);
    const UnitParams p = testkit::random_tuned(rng, T_c);
    for (double T_ext : {-25.0, -10.0, 0.0, 10.0}) {
      EXPECT_NEAR(steady_state(p, T_ext, 0, 0).T_in0, T_c, 1e-9);
    }
  }
}
