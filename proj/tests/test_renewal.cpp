#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rhp/renewal.hpp"
#include "rhp/stats.hpp"

using namespace rhp;

namespace {

stats::Summary window_counts(const RenewalModel& m, const DelaySpec& delay, double a, double b, std::size_t reps,
                             std::uint64_t seed) {
  std::vector<double> counts(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    RandomStream rng = RandomStream::substream(seed, i);
    counts[i] = static_cast<double>(simulate_delayed_renewal(m, delay, b, rng).count_in(a, b));
  }
  return stats::summarize(counts);
}

}  // namespace

TEST(Renewal, ExponentialCountWithOrigin) {
  const auto m = RenewalModel::exponential(2.0);
  std::vector<double> counts(10000);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    RandomStream rng = RandomStream::substream(1, i);
    counts[i] = static_cast<double>(simulate_renewal(m, 10.0, true, rng).size());
  }
  const auto s = stats::summarize(counts);
  EXPECT_LT(std::abs(s.mean - 21.0), 3.0 * s.standard_error);
}

TEST(Renewal, ShortHorizon) {
  const auto m = RenewalModel::tabulated({1.0, 2.0}, {1.0, 1.0});  // tau >= 1
  RandomStream rng(4);
  const auto with = simulate_renewal(m, 0.5, true, rng);
  ASSERT_EQ(with.size(), 1u);
  EXPECT_EQ(with.events[0].time, 0.0);
  EXPECT_EQ(simulate_renewal(m, 0.5, false, rng).size(), 0u);
}

TEST(Renewal, SameSeedSameEpochs) {
  const auto m = RenewalModel::gamma(2.0, 1.0);
  RandomStream a(99);
  RandomStream b(99);
  EXPECT_EQ(simulate_renewal(m, 50.0, true, a).times(), simulate_renewal(m, 50.0, true, b).times());
}

TEST(Renewal, StationaryExponentialIsPoisson) {
  const auto s = window_counts(RenewalModel::exponential(2.0), StationaryDelay{}, 0.0, 10.0, 10000, 2);
  EXPECT_LT(std::abs(s.mean - 20.0), 3.0 * s.standard_error);
}

TEST(Renewal, StationaryGammaShiftInvariant) {
  const auto m = RenewalModel::gamma(2.0, 1.0);
  for (double t : {0.0, 3.0, 10.0, 40.0, 100.0}) {
    const auto s = window_counts(m, StationaryDelay{}, t, t + 5.0, 10000, 3 + static_cast<std::uint64_t>(t));
    EXPECT_LT(std::abs(s.mean - 2.5), 3.0 * s.standard_error) << "shift " << t;
  }
}

TEST(Renewal, StationaryNeedsFiniteMean) {
  const auto heavy = RenewalModel::tabulated({0.0, 1.0}, {1.0, 1.0}, 0.3, 0.5);
  RandomStream rng(1);
  EXPECT_THROW((void)simulate_delayed_renewal(heavy, StationaryDelay{}, 10.0, rng), Error);
}

TEST(Renewal, DegenerateDelayAtZeroReproducesOrdinary) {
  const auto m = RenewalModel::gamma(2.0, 1.0);
  RandomStream a(17);
  RandomStream b(17);
  const auto ordinary = simulate_renewal(m, 30.0, true, a);
  const auto delayed = simulate_delayed_renewal(m, DegenerateDelay{0.0}, 30.0, b);
  EXPECT_EQ(ordinary.times(), delayed.times());
  EXPECT_EQ(delayed.convention, ordinary.convention);
}

TEST(RenewalTable, ExponentialIsLinear) {
  const auto t = renewal_table(RenewalModel::exponential(2.0), 10.0, 0.001);
  EXPECT_DOUBLE_EQ(t.phi_fn.front(), 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < t.grid.size(); ++i) worst = std::max(worst, std::abs(t.phi_fn[i] - (1.0 + 2.0 * t.grid[i])));
  EXPECT_LT(worst, 1e-3);
  EXPECT_NEAR(t.phi_fn_at(3.0), 7.0, 1e-3);
  for (double x : {0.5, 5.0, 9.5}) EXPECT_NEAR(t.phi_density_at(x), 2.0, 1e-3);
}

TEST(RenewalTable, ExponentialMatchesMonteCarloMeanCount) {
  const auto m = RenewalModel::exponential(2.0);
  std::vector<double> counts(20000);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    RandomStream rng = RandomStream::substream(8, i);
    counts[i] = static_cast<double>(simulate_renewal(m, 3.0, true, rng).size());
  }
  const auto s = stats::summarize(counts);
  const auto t = renewal_table(m, 3.0, 0.001);
  EXPECT_LT(std::abs(s.mean - t.phi_fn_at(3.0)), 3.0 * s.standard_error);
}

TEST(RenewalTable, GammaAgainstLaplaceClosedForm) {
  const auto t = renewal_table(RenewalModel::gamma(2.0, 1.0), 10.0, 0.001);
  EXPECT_NEAR(t.phi_fn_at(1.0), 1.28383, 1e-3);
  EXPECT_NEAR(t.phi_fn_at(1.0), oracle::gamma21_renewal_function(1.0), 1e-5);
  for (std::size_t i = 0; i < t.grid.size(); i += 97) {
    EXPECT_NEAR(t.phi_fn[i], oracle::gamma21_renewal_function(t.grid[i]), 1e-5);
    EXPECT_NEAR(t.phi_density[i], oracle::gamma21_renewal_density(t.grid[i]), 1e-5);
  }
}

TEST(RenewalTable, SecondOrderConvergence) {
  const auto m = RenewalModel::gamma(2.0, 1.0);
  const double exact = oracle::gamma21_renewal_function(5.0);
  const double e1 = std::abs(renewal_table(m, 5.0, 0.02).phi_fn_at(5.0) - exact);
  const double e2 = std::abs(renewal_table(m, 5.0, 0.01).phi_fn_at(5.0) - exact);
  const double e3 = std::abs(renewal_table(m, 5.0, 0.005).phi_fn_at(5.0) - exact);
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.2);
  EXPECT_NEAR(std::log2(e2 / e3), 2.0, 0.2);
}

TEST(RenewalTable, Invariants) {
  for (const auto& m : {RenewalModel::gamma(0.7, 1.0), RenewalModel::weibull(2.5, 1.0), RenewalModel::lognormal(0.0, 0.5)}) {
    try {
      const auto t = renewal_table(m, 8.0, 0.005);
      EXPECT_DOUBLE_EQ(t.phi_fn[0], 1.0);
      for (std::size_t i = 1; i < t.grid.size(); ++i) {
        EXPECT_GE(t.phi_fn[i], t.phi_fn[i - 1]);
        EXPECT_GE(t.phi_density[i], 0.0);
      }
    } catch (const Error& e) {
      // Gamma with shape < 1 has a singular density at the origin.
      EXPECT_EQ(m.family_name(), "gamma") << e.what();
    }
  }
}

TEST(RenewalTable, Errors) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW((void)renewal_table(RenewalModel::tabulated({0.0, 1.0, 2.0}, {1.0, nan, 1.0}), 1.0, 0.01), Error);
  const auto t = renewal_table(RenewalModel::exponential(1.0), 2.0, 0.01);
  EXPECT_THROW((void)t.phi_fn_at(3.0), Error);
}
