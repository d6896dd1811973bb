#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rhp/validate.hpp"

using namespace rhp;

namespace {
const Convention kOrigin{true, DelayKind::none};
const Convention kNoOrigin{false, DelayKind::none};
const auto kKernel = ExcitationKernel::exponential(0.5, 1.0);
}  // namespace

TEST(Rescaling, PoissonIsExact) {
  const auto m = RenewalModel::exponential(2.0);
  const auto streams = simulate_replicates(SimMethod::cluster, m, ExcitationKernel::zero(), 50.0, kNoOrigin, 100, 1);
  const auto r = time_rescaling_test(streams, m, ExcitationKernel::zero());
  EXPECT_TRUE(r.pass) << r.p_value;
  EXPECT_GE(r.sample_sizes[0], 100u);
}

TEST(Rescaling, GammaClusterStreamsPass) {
  const auto m = RenewalModel::gamma(2.0, 1.0);
  const auto streams = simulate_replicates(SimMethod::cluster, m, kKernel, 100.0, kOrigin, 150, 2);
  const auto r = time_rescaling_test(streams, m, kKernel);
  EXPECT_GE(r.sample_sizes[0], 10000u);
  EXPECT_TRUE(r.pass) << r.p_value;
}

TEST(Rescaling, MisspecifiedAlphaRejected) {
  const auto m = RenewalModel::gamma(2.0, 1.0);
  const auto streams = simulate_replicates(SimMethod::cluster, m, kKernel, 100.0, kOrigin, 150, 3);
  const auto r = time_rescaling_test(streams, m, ExcitationKernel::exponential(0.8, 1.0));
  EXPECT_GE(r.sample_sizes[0], 10000u);
  EXPECT_FALSE(r.pass);
  EXPECT_LT(r.p_value, 0.01);
}

TEST(Rescaling, TooFewGaps) {
  const auto m = RenewalModel::exponential(1.0);
  const auto streams = simulate_replicates(SimMethod::cluster, m, ExcitationKernel::zero(), 5.0, kNoOrigin, 3, 4);
  EXPECT_THROW((void)time_rescaling_test(streams, m, ExcitationKernel::zero()), Error);
}

TEST(Rescaling, NullCalibration) {
  // 200 meta-replicates of the exact Poisson case at level 0.05.
  const auto m = RenewalModel::exponential(1.0);
  int rejections = 0;
  for (std::uint64_t meta = 0; meta < 200; ++meta) {
    const auto streams =
        simulate_replicates(SimMethod::cluster, m, ExcitationKernel::zero(), 40.0, kNoOrigin, 5, 1000 + meta);
    if (!time_rescaling_test(streams, m, ExcitationKernel::zero(), 0.05).pass) ++rejections;
  }
  EXPECT_LE(rejections, 15);
}

TEST(Cross, SplitSampleCalibration) {
  CrossSimulatorSetup setup{RenewalModel::gamma(2.0, 1.0), kKernel, 50.0, kOrigin, {}};
  const auto r = cross_simulator_test(setup, SimMethod::cluster, SimMethod::cluster, 500, equal_windows(50.0, 5), 5);
  EXPECT_TRUE(r.pass) << r.p_value;
  EXPECT_EQ(r.detail.size(), 5u);
}

TEST(Cross, ClassicalHawkes) {
  CrossSimulatorSetup setup{RenewalModel::exponential(1.0), kKernel, 100.0, kNoOrigin, {}};
  const auto r = cross_simulator_test(setup, SimMethod::cluster, SimMethod::thinning, 1000, equal_windows(100.0, 4), 6);
  EXPECT_TRUE(r.pass) << r.p_value;
}

TEST(Cross, DetectsWrongModel) {
  // Stationary vs plain-with-origin differ near the origin for Gamma.
  CrossSimulatorSetup setup{RenewalModel::gamma(4.0, 4.0), ExcitationKernel::zero(), 2.0, kOrigin, {}};
  const auto r = cross_simulator_test(setup, SimMethod::cluster, SimMethod::stationary, 2000, {{0.0, 0.5}}, 7);
  EXPECT_FALSE(r.pass);
}

TEST(Existence, GammaPasses) {
  const auto r = existence_preconditions(RenewalModel::gamma(2.0, 1.0), kKernel);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.detail.size(), 5u);
  for (const auto& d : r.detail) EXPECT_TRUE(d.pass) << d.label;
}

TEST(Existence, CriticalAlphaFails) {
  const auto r = existence_preconditions(RenewalModel::gamma(2.0, 1.0), ExcitationKernel::exponential(1.0, 1.0));
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.message.find("subcriticality"), std::string::npos);
  EXPECT_FALSE(r.detail[0].pass);
  EXPECT_FALSE(r.detail[4].pass);
}

TEST(Existence, InfiniteMeanViolatesB) {
  const auto heavy = RenewalModel::tabulated({0.0, 1.0}, {1.0, 1.0}, 0.3, 0.7);
  const auto r = existence_preconditions(heavy, kKernel);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.detail[1].pass);
  EXPECT_TRUE(r.detail[0].pass);
  EXPECT_TRUE(r.detail[2].pass);
  EXPECT_NE(r.message.find("(B)"), std::string::npos);
}

TEST(Stationarity, PoissonPlainEqualsStationary) {
  // Shifts start past the offspring transient of immigrants started at 0.
  const auto r = stationarity_and_convergence(RenewalModel::exponential(1.0), kKernel, {20.0, 30.0, 40.0}, 5.0, 1000,
                                              8, StationarityOptions{0.01, 3.0, kNoOrigin});
  EXPECT_TRUE(r.pass);
  for (const auto& d : r.detail)
    if (d.label.rfind("plain", 0) == 0) {
      EXPECT_LT(d.statistic, d.threshold) << d.label;
    }
}

TEST(Stationarity, GammaConvergence) {
  const auto r = stationarity_and_convergence(RenewalModel::gamma(2.0, 1.0), kKernel, {25.0, 50.0, 100.0, 150.0, 200.0},
                                              10.0, 2000, 9);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.statistic, stats::ks_two_sample_critical(2000, 2000, 0.01));
}

TEST(Stationarity, DistanceShrinksFromOrigin) {
  // With an event at the origin and a very regular renewal law, counts near
  // the origin differ from the stationary ones; later they agree.
  const auto r = stationarity_and_convergence(RenewalModel::gamma(16.0, 16.0), ExcitationKernel::zero(),
                                              {0.0, 1.5, 30.0}, 0.5, 2000, 10);
  std::vector<double> distances;
  for (const auto& d : r.detail)
    if (d.label.rfind("plain", 0) == 0) distances.push_back(d.statistic);
  ASSERT_EQ(distances.size(), 3u);
  EXPECT_GT(distances[0], distances[2]);
  EXPECT_GT(distances[0], stats::ks_two_sample_critical(2000, 2000, 0.01));
  EXPECT_LT(distances[2], stats::ks_two_sample_critical(2000, 2000, 0.01));
}

TEST(ClusterLaws, BorelAndGenerations) {
  EXPECT_TRUE(cluster_size_test(kKernel, 20000, 11).pass);
  EXPECT_TRUE(generation_test(kKernel, 20000, 4, 12).pass);
}
