#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rhp/random.hpp"
#include "rhp/stats.hpp"

using namespace rhp;

TEST(Stats, Summary) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto s = stats::summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.variance, 5.0 / 3.0, 1e-14);
  EXPECT_NEAR(s.standard_error, std::sqrt(5.0 / 12.0), 1e-14);
}

TEST(Stats, KolmogorovDistributionKnownValues) {
  // Classical critical values of sqrt(n) D: 1.358 at 0.05, 1.628 at 0.01.
  EXPECT_NEAR(stats::kolmogorov_survival(1.3581), 0.05, 2e-4);
  EXPECT_NEAR(stats::kolmogorov_survival(1.6276), 0.01, 1e-4);
  // Both series branches agree where they meet.
  EXPECT_NEAR(stats::kolmogorov_survival(1.17999), stats::kolmogorov_survival(1.18001), 2e-5);
}

TEST(Stats, ExactOneSampleSmallN) {
  // n = 1: P(D_1 < d) = 2d - 1 for d in [1/2, 1].
  EXPECT_NEAR(stats::kolmogorov_exact_cdf(1, 0.8), 0.6, 1e-12);
  // n = 2, d in [1/2, 1): P(D_2 < d) = 1 - 2 (1 - d)^2.
  EXPECT_NEAR(stats::kolmogorov_exact_cdf(2, 0.7), 1.0 - 2.0 * 0.09, 1e-12);
  // Large n approaches the limit law.
  EXPECT_NEAR(1.0 - stats::kolmogorov_exact_cdf(400, 1.36 / 20.0), stats::kolmogorov_survival(1.36), 0.01);
}

TEST(Stats, SmirnovExactSmallSamples) {
  // m = n = 2: D takes values 1/2 and 1; P(D = 1) = 2 / C(4,2) = 1/3.
  EXPECT_NEAR(1.0 - stats::smirnov_exact_cdf(2, 2, 1.0), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(1.0 - stats::smirnov_exact_cdf(2, 2, 0.5), 1.0, 1e-12);
  const auto r = stats::ks_two_sample({1.0, 2.0}, {3.0, 4.0});
  EXPECT_DOUBLE_EQ(r.statistic, 1.0);
  EXPECT_NEAR(r.p_value, 1.0 / 3.0, 1e-12);
}

TEST(Stats, TwoSampleStatisticHandlesTies) {
  EXPECT_DOUBLE_EQ(stats::ks_two_sample_statistic({1, 1, 2, 2}, {1, 1, 2, 2}), 0.0);
  EXPECT_DOUBLE_EQ(stats::ks_two_sample_statistic({1, 1, 1, 2}, {1, 2, 2, 2}), 0.5);
}

TEST(Stats, CriticalValue) {
  EXPECT_NEAR(stats::ks_two_sample_critical(2000, 2000, 0.01), 1.6276 * std::sqrt(2.0 / 2000.0), 2e-4);
}

TEST(Stats, OneSampleCalibration) {
  // Rejection rate under the null stays within 1.5x the nominal level.
  for (std::size_t n : {20u, 200u}) {
    int rejections = 0;
    for (std::size_t rep = 0; rep < 200; ++rep) {
      RandomStream rng = RandomStream::substream(100 + n, rep);
      std::vector<double> xs(n);
      for (auto& x : xs) x = rng.uniform();
      if (stats::ks_one_sample(xs, [](double u) { return std::clamp(u, 0.0, 1.0); }).p_value <= 0.05) ++rejections;
    }
    EXPECT_LE(rejections, static_cast<int>(1.5 * 0.05 * 200)) << n;
  }
}

TEST(Stats, TwoSampleCalibration) {
  for (std::size_t n : {10u, 300u}) {
    int rejections = 0;
    for (std::size_t rep = 0; rep < 200; ++rep) {
      RandomStream rng = RandomStream::substream(200 + n, rep);
      std::vector<double> a(n), b(n);
      for (auto& x : a) x = rng.exponential(1.0);
      for (auto& x : b) x = rng.exponential(1.0);
      if (stats::ks_two_sample(a, b).p_value <= 0.05) ++rejections;
    }
    EXPECT_LE(rejections, static_cast<int>(1.5 * 0.05 * 200)) << n;
  }
}

TEST(Stats, ChiSquare) {
  // Perfect fit.
  const auto r = stats::chi_square_gof({50, 30, 20}, {0.5, 0.3, 0.2});
  EXPECT_NEAR(r.statistic, 0.0, 1e-12);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
  // Hand-computed: expected 25 each, chi2 = (10^2 + 10^2) / 25 = 8 on 1 dof.
  const auto s = stats::chi_square_gof({35, 15}, {0.5, 0.5});
  EXPECT_NEAR(s.statistic, 8.0, 1e-12);
  EXPECT_EQ(s.dof, 1u);
  EXPECT_NEAR(s.p_value, std::erfc(std::sqrt(8.0 / 2.0)), 1e-10);
  // Sparse tail bins pool into the last well-filled bin.
  const auto p = stats::chi_square_gof({90, 8, 1, 1}, {0.9, 0.08, 0.015, 0.005});
  EXPECT_EQ(p.bins, 2u);
}
