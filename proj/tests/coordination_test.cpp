#include <gtest/gtest.h>

#include <numeric>
#include <optional>
#include <random>

#include "fairheat/bundled.hpp"
#include "fairheat/coordination.hpp"
#include "support.hpp"

using namespace fairheat;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Waterfill by exhaustive search: the active set S is consistent when every
// unit in S stays non-negative at level (P_sat - sum of cut desires) / W_S
// and every cut unit would have gone negative.
std::vector<double> waterfill_oracle(const std::vector<double>& desired,
                                     const std::vector<double>& w, double P_sat) {
  const std::size_t n = desired.size();
  std::optional<std::vector<double>> found;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double cut_desire = 0.0;
    double weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        weight += w[i];
      } else {
        cut_desire += desired[i];
      }
    }
    if (weight <= 0.0) continue;
    const double level = (P_sat - cut_desire) / weight;
    bool ok = true;
    std::vector<double> P(n, 0.0);
    for (std::size_t i = 0; i < n && ok; ++i) {
      const double x = desired[i] - w[i] * level;
      if (mask & (1u << i)) {
        ok = x >= -1e-9;
        P[i] = std::max(0.0, x);
      } else {
        ok = x < 1e-9;
      }
    }
    if (ok) {
      found = P;
      break;
    }
  }
  return found.value_or(std::vector<double>(n, 0.0));
}

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> w(n);
  for (auto& x : w) x = testkit::uniform(rng, 0.01, 1.0);
  const double s = sum(w);
  for (auto& x : w) x /= s;
  // Put the rounding remainder on the last weight so the sum is exact to
  // the tolerance.
  w.back() = 1.0 - (sum(w) - w.back());
  return w;
}

}  // namespace

TEST(Weights, Flat) {
  const auto units = table1_units();
  for (double w : compute_weights(Strategy::flat(), units)) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
}

TEST(Weights, Skewed) {
  const auto w = compute_weights(Strategy::skewed(), table1_units());
  EXPECT_EQ(w, (std::vector<double>{0, 0, 1}));
}

TEST(Weights, GainProportionalBundled) {
  const auto w = compute_weights(Strategy::gain(), table1_units());
  EXPECT_NEAR(w[0], 54.0 / 303.0, 1e-12);
  EXPECT_NEAR(w[1], 73.0 / 303.0, 1e-12);
  EXPECT_NEAR(w[2], 176.0 / 303.0, 1e-12);
  EXPECT_NEAR(w[0], 0.17822, 1e-5);
  EXPECT_NEAR(w[1], 0.24092, 1e-5);
  EXPECT_NEAR(w[2], 0.58086, 1e-5);
}

TEST(Weights, PriceProportionalBundled) {
  const auto w = compute_weights(Strategy::price({2, 2, 1}), table1_units());
  EXPECT_NEAR(w[0], 27.0 / 239.5, 1e-12);
  EXPECT_NEAR(w[1], 36.5 / 239.5, 1e-12);
  EXPECT_NEAR(w[2], 176.0 / 239.5, 1e-12);
  EXPECT_NEAR(w[0], 0.11273, 1e-5);
  EXPECT_NEAR(w[1], 0.15240, 1e-5);
  EXPECT_NEAR(w[2], 0.73486, 1e-5);
}

TEST(Weights, EqualPricesReduceToGain) {
  const auto units = table1_units();
  const auto g = compute_weights(Strategy::gain(), units);
  const auto p = compute_weights(Strategy::price({3, 3, 3}), units);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(g[i], p[i], 1e-15);
}

TEST(Weights, MixedSignNamesOffenders) {
  auto units = table1_units();
  units[1].a1 = -1.0;
  try {
    compute_weights(Strategy::gain(), units);
    FAIL() << "expected StrategyInapplicable";
  } catch (const StrategyInapplicable& e) {
    EXPECT_NE(std::string(e.what()).find("unit-2"), std::string::npos) << e.what();
  }
}

TEST(Weights, ZeroTermRejected) {
  auto units = table1_units();
  units[0].a1 = 1.0;
  EXPECT_THROW(compute_weights(Strategy::gain(), units), StrategyInapplicable);
}

TEST(Weights, BadPrices) {
  const auto units = table1_units();
  EXPECT_THROW(compute_weights(Strategy::price({1, 0, 1}), units), ValidationError);
  EXPECT_THROW(compute_weights(Strategy::price({1, -2, 1}), units), ValidationError);
  EXPECT_THROW(compute_weights(Strategy::price({1, 1}), units), ValidationError);
}

TEST(Weights, Explicit) {
  const auto units = table1_units();
  EXPECT_EQ(compute_weights(Strategy::explicit_weights({0.5, 0.25, 0.25}), units),
            (std::vector<double>{0.5, 0.25, 0.25}));
  EXPECT_THROW(compute_weights(Strategy::explicit_weights({0.5, 0.6, 0.0}), units),
               ValidationError);
  EXPECT_THROW(compute_weights(Strategy::explicit_weights({1.0}), units), ValidationError);
}

TEST(Weights, ParseNames) {
  EXPECT_EQ(parse_strategy_kind("gain"), StrategyKind::GainProportional);
  EXPECT_EQ(parse_strategy_kind("price-proportional"), StrategyKind::PriceProportional);
  EXPECT_THROW(parse_strategy_kind("fairest"), ValidationError);
}

TEST(Deficit, Examples) {
  EXPECT_DOUBLE_EQ(compute_deficit(std::vector<double>{800, 700, 600}, 2200), 0.0);
  EXPECT_DOUBLE_EQ(compute_deficit(std::vector<double>{900, 800, 800}, 2200), 300.0);
  EXPECT_DOUBLE_EQ(compute_deficit(std::vector<double>{0, 0, 0}, 0), 0.0);
  EXPECT_THROW(compute_deficit(std::vector<double>{1, 2}, -1), ValidationError);
}

TEST(Allocate, FlatSplit) {
  const std::vector<double> w(3, 1.0 / 3.0);
  const auto r = allocate(std::vector<double>{900, 800, 800}, w, 300, AllocationMode::Clamp);
  EXPECT_NEAR(r.P[0], 800, 1e-12);
  EXPECT_NEAR(r.P[1], 700, 1e-12);
  EXPECT_NEAR(r.P[2], 700, 1e-12);
  EXPECT_NEAR(r.sum_P(), 2200, 1e-9);
  EXPECT_TRUE(r.clamp_events.empty());
}

TEST(Allocate, ZeroDeficitIsIdentity) {
  const std::vector<double> desired{3, 0, 7.5};
  for (auto mode : {AllocationMode::Clamp, AllocationMode::Redistribute}) {
    const auto r = allocate(desired, std::vector<double>{0.2, 0.3, 0.5}, 0, mode);
    EXPECT_EQ(r.P, desired);
  }
}

TEST(Allocate, ClampModeCutsWithoutReassigning) {
  const std::vector<double> w(3, 1.0 / 3.0);
  const auto r = allocate(std::vector<double>{10, 800, 800}, w, 300, AllocationMode::Clamp);
  EXPECT_EQ(r.P[0], 0.0);
  EXPECT_NEAR(r.P[1], 700, 1e-12);
  EXPECT_NEAR(r.P[2], 700, 1e-12);
  EXPECT_EQ(r.clamp_events, std::vector<std::size_t>{0});
}

TEST(Allocate, RedistributeSpreadsResidual) {
  // Unit 1 absorbs only its 10 kW; the remaining 290 kW are split evenly.
  const std::vector<double> desired{10, 800, 800};
  const std::vector<double> w(3, 1.0 / 3.0);
  const auto r = allocate(desired, w, 300, AllocationMode::Redistribute);
  EXPECT_EQ(r.P[0], 0.0);
  EXPECT_NEAR(r.P[1], 655, 1e-12);
  EXPECT_NEAR(r.P[2], 655, 1e-12);
  EXPECT_NEAR(r.sum_P(), 1310, 1e-9);
  const auto oracle = waterfill_oracle(desired, w, 300);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.P[i], oracle[i], 1e-9);
}

TEST(Allocate, RedistributeZeroWeightRemainder) {
  // Skewed weights with the weighted unit exhausted: the rest is spread
  // equally over the remaining units.
  const auto r = allocate(std::vector<double>{100, 100, 10}, std::vector<double>{0, 0, 1}, 50,
                          AllocationMode::Redistribute);
  EXPECT_EQ(r.P[2], 0.0);
  EXPECT_NEAR(r.P[0], 80, 1e-12);
  EXPECT_NEAR(r.P[1], 80, 1e-12);
}

TEST(Allocate, RejectsBadWeights) {
  EXPECT_THROW(allocate(std::vector<double>{1, 1}, std::vector<double>{0.5, 0.6}, 0,
                        AllocationMode::Clamp),
               ValidationError);
  EXPECT_THROW(allocate(std::vector<double>{1, 1}, std::vector<double>{1.0}, 0,
                        AllocationMode::Clamp),
               ValidationError);
}

TEST(Allocate, RandomizedProperties) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 10000; ++k) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<double> desired(n);
    for (auto& x : desired) x = rng() % 5 == 0 ? 0.0 : testkit::uniform(rng, 0, 1000);
    const std::vector<double> w = random_weights(rng, n);
    ASSERT_NEAR(sum(w), 1.0, 1e-12);
    const double P_max = testkit::uniform(rng, 0, 1.2 * sum(desired) + 1);
    const double P_sat = compute_deficit(desired, P_max);
    for (auto mode : {AllocationMode::Clamp, AllocationMode::Redistribute}) {
      const auto r = allocate(desired, w, P_sat, mode);
      for (std::size_t i = 0; i < n; ++i) {
        ASSERT_LE(r.P[i], desired[i]);
        ASSERT_GE(r.P[i], 0.0);
      }
      if (P_sat == 0.0) {
        ASSERT_EQ(r.P, desired);
      }
      if (mode == AllocationMode::Redistribute) {
        ASSERT_LE(r.sum_P(), P_max + 1e-9);
        if (P_sat > 0.0) {
          ASSERT_NEAR(r.sum_P(), P_max, 1e-9 * (1 + P_max));
        }
      }
    }
  }
}

TEST(Allocate, RedistributeMatchesWaterfillOracle) {
  std::mt19937_64 rng(32);
  for (int k = 0; k < 3000; ++k) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<double> desired(n);
    for (auto& x : desired) x = testkit::uniform(rng, 0, 100);
    const std::vector<double> w = random_weights(rng, n);
    const double P_sat = testkit::uniform(rng, 0, sum(desired));
    const auto r = allocate(desired, w, P_sat, AllocationMode::Redistribute);
    const auto oracle = waterfill_oracle(desired, w, P_sat);
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(r.P[i], oracle[i], 1e-9) << k;
  }
}

TEST(Round, BelowSaturation) {
  std::vector<ControlOutput> out{{0, 100, false}, {0, 200, false}, {0, 0, true}};
  const auto r = coordination_round(out, 1000, std::vector<double>{0.2, 0.3, 0.5},
                                    AllocationMode::Clamp);
  EXPECT_EQ(r.P_sat, 0.0);
  EXPECT_EQ(r.P, (std::vector<double>{100, 200, 0}));
  EXPECT_EQ(r.P_max, 1000);
}

TEST(Round, SumEqualsCapWithoutCuts) {
  std::vector<ControlOutput> out{{0, 900, false}, {0, 800, false}, {0, 800, false}};
  const auto w = compute_weights(Strategy::gain(), table1_units());
  const auto r = coordination_round(out, 2200, w, AllocationMode::Clamp);
  EXPECT_TRUE(r.clamp_events.empty());
  EXPECT_NEAR(r.sum_P(), 2200, 1e-9);
}

TEST(Round, SingleUnit) {
  for (double desired : {50.0, 150.0}) {
    std::vector<ControlOutput> out{{0, desired, false}};
    const auto r = coordination_round(out, 100, std::vector<double>{1.0}, AllocationMode::Clamp);
    EXPECT_NEAR(r.P[0], std::min(desired, 100.0), 1e-12);
  }
}

TEST(Deviation, Examples) {
  UnitParams p = table1_units()[0];
  p.k_p = 100;
  p = tuned(p, 20);
  EXPECT_DOUBLE_EQ(predicted_deviation(p, 0.0, 400).delta_T_in, 0.0);

  UnitParams q;
  q.k_p = 100;
  q.a1 = -1;
  q.R_ext = 200;
  q.R_hs = 270;
  q.eta = 1;
  const DeviationPrediction d = predicted_deviation(q, 0.5, 400);
  EXPECT_NEAR(d.delta_T_in, -1.0, 1e-15);
  EXPECT_FALSE(d.well_tuned);
  EXPECT_FALSE(d.warning.empty());
}

TEST(Deviation, MatchesSteadyStateForTunedUnits) {
  std::mt19937_64 rng(33);
  for (int k = 0; k < 500; ++k) {
    const UnitParams p = testkit::random_tuned(rng);
    const double w = testkit::uniform(rng, 0, 1);
    const double P_sat = testkit::uniform(rng, 0, 0.05);
    const double T_ext = testkit::uniform(rng, -20, 0);
    const double shift = steady_state(p, T_ext, w, P_sat).T_in0 - steady_state(p, T_ext, 0, 0).T_in0;
    const DeviationPrediction d = predicted_deviation(p, w, P_sat);
    EXPECT_TRUE(d.well_tuned);
    EXPECT_NEAR(d.delta_T_in, shift, 1e-9);
  }
}
