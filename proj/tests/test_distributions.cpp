#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "rhp/distributions.hpp"
#include "rhp/random.hpp"
#include "rhp/stats.hpp"

using namespace rhp;

namespace {

std::vector<RenewalModel> all_families() {
  return {RenewalModel::exponential(2.0), RenewalModel::gamma(2.0, 1.0), RenewalModel::weibull(1.5, 2.0),
          RenewalModel::lognormal(0.2, 0.6),
          RenewalModel::tabulated({0.0, 1.0, 2.0, 3.0}, {0.0, 2.0, 1.0, 0.0})};
}

double upper_limit(const RenewalModel& m) { return m.family_name() == "tabulated" ? 3.0 : 80.0; }

}  // namespace

TEST(Distributions, HazardExamples) {
  EXPECT_DOUBLE_EQ(hazard_at(RenewalModel::exponential(2.0), 5.0), 2.0);
  EXPECT_NEAR(hazard_at(RenewalModel::weibull(1.0, 0.5), 5.0), 2.0, 1e-12);
  const double f1 = std::exp(-1.0);  // Gamma(2,1) density at 1
  EXPECT_NEAR(hazard_at(RenewalModel::gamma(2.0, 1.0), 1.0), f1 / (1.0 - oracle::gamma21_cdf(1.0)), 1e-9);
  EXPECT_NEAR(hazard_at(RenewalModel::gamma(2.0, 1.0), 1.0), 0.5, 1e-9);
}

TEST(Distributions, DensityIntegratesToOne) {
  for (const auto& m : all_families()) {
    const double mass = oracle::simpson([&](double t) { return m.density(t); }, 0.0, upper_limit(m), 200000);
    EXPECT_NEAR(mass, 1.0, 1e-6) << m.family_name();
  }
}

TEST(Distributions, HazardIsDensityOverSurvival) {
  for (const auto& m : all_families()) {
    for (double t = 0.05; t < std::min(upper_limit(m), 10.0) - 0.1; t += 0.37) {
      const double survival = 1.0 - m.cdf(t);
      const double expected = m.density(t) / survival;
      // The oracle loses about eps / (1 - F) relative accuracy to cancellation.
      const double tol = (1e-9 + 4.0 * std::numeric_limits<double>::epsilon() / survival) * std::max(1.0, expected);
      EXPECT_NEAR(m.hazard(t), expected, tol) << m.family_name() << " t=" << t;
    }
  }
}

TEST(Distributions, MeanMatchesFirstMoment) {
  for (const auto& m : all_families()) {
    const double moment = oracle::simpson([&](double t) { return t * m.density(t); }, 0.0, upper_limit(m), 200000);
    EXPECT_NEAR(m.mean_interarrival(), moment, 1e-4 * moment) << m.family_name();
  }
}

TEST(Distributions, HazardBeyondSupportIsAnError) {
  const auto m = RenewalModel::tabulated({0.0, 1.0}, {1.0, 1.0});
  EXPECT_NO_THROW(m.hazard(0.5));
  try {
    (void)hazard_at(m, 1.5);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("hazard undefined beyond support"), std::string::npos);
  }
}

TEST(Distributions, TabulatedGapsAndInfiniteMean) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto gappy = RenewalModel::tabulated({0.0, 1.0, 2.0}, {1.0, nan, 1.0});
  EXPECT_FALSE(gappy.has_density());
  EXPECT_THROW((void)gappy.density(0.5), Error);

  const auto heavy = RenewalModel::tabulated({0.0, 1.0}, {1.0, 1.0}, 0.2, 0.8);
  EXPECT_TRUE(std::isinf(heavy.mean_interarrival()));
  EXPECT_NEAR(heavy.survival(4.0), 0.2 * std::pow(0.25, 0.8), 1e-12);
  RandomStream rng(3);
  EXPECT_THROW((void)heavy.sample_equilibrium(rng), Error);
}

TEST(Distributions, WeibullShapeOneIsExponential) {
  const auto w = RenewalModel::weibull(1.0, 0.5);
  const auto e = RenewalModel::exponential(2.0);
  for (double t : {0.1, 0.7, 3.0}) {
    EXPECT_NEAR(w.cdf(t), e.cdf(t), 1e-14);
    EXPECT_NEAR(w.integrated_survival(t), e.integrated_survival(t), 1e-12);
  }
}

TEST(Kernel, MassExamples) {
  EXPECT_DOUBLE_EQ(kernel_mass(ExcitationKernel::exponential(0.5, 1.3)), 0.5);
  EXPECT_DOUBLE_EQ(kernel_mass(ExcitationKernel::tabulated({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0})), 0.0);
  const auto tri = ExcitationKernel::tabulated({0.0, 1.0, 2.0}, {0.0, 0.3, 0.0});
  const double area = oracle::simpson([&](double t) { return tri.value(t); }, 0.0, 2.0, 20000);
  EXPECT_NEAR(area, 0.3, 1e-6);
  EXPECT_NEAR(kernel_mass(tri), 0.3, 1e-6);
}

TEST(Kernel, SupercriticalRejected) {
  try {
    (void)kernel_mass(ExcitationKernel::exponential(1.0, 1.0));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("branching ratio must be < 1"), std::string::npos);
  }
  EXPECT_THROW((void)kernel_mass(ExcitationKernel::tabulated({0.0, 1.0}, {2.0, 2.0})), Error);
}

TEST(Kernel, ValuesAndIntegral) {
  const auto k = ExcitationKernel::exponential(0.5, 2.0);
  EXPECT_DOUBLE_EQ(k.value(-1.0), 0.0);
  EXPECT_GE(k.value(0.0), 0.0);
  const double mass = oracle::simpson([&](double t) { return k.value(t); }, 0.0, 40.0, 200000);
  EXPECT_NEAR(mass, 0.5, 1e-6);
  EXPECT_NEAR(k.cumulative(1.0), 0.5 * (1.0 - std::exp(-2.0)), 1e-14);
}

TEST(Sampling, DeterministicForSameSeed) {
  const auto m = RenewalModel::exponential(2.0);
  RandomStream a(42);
  RandomStream b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_interarrival(m, a), sample_interarrival(m, b));
  RandomStream c(42);
  const double first = sample_interarrival(m, c);
  c.reseed(42);
  EXPECT_EQ(sample_interarrival(m, c), first);
}

TEST(Sampling, GammaMomentAndKs) {
  const auto m = RenewalModel::gamma(2.0, 1.0);
  RandomStream rng(7);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_interarrival(m, rng);
  const auto s = stats::summarize(xs);
  EXPECT_LT(std::abs(s.mean - 2.0), 3.0 * s.standard_error);
  const auto ks = stats::ks_one_sample(xs, [](double t) { return oracle::gamma21_cdf(t); });
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(Sampling, OtherFamiliesPassKs) {
  for (const auto& m : all_families()) {
    RandomStream rng(11);
    std::vector<double> xs(20000);
    for (auto& x : xs) x = m.sample(rng);
    const auto ks = stats::ks_one_sample(xs, [&](double t) { return m.cdf(t); });
    EXPECT_GT(ks.p_value, 0.01) << m.family_name();
  }
}

TEST(Sampling, EquilibriumDelayGamma) {
  const auto m = RenewalModel::gamma(2.0, 1.0);
  for (double t : {0.0, 0.5, 2.0, 6.0}) EXPECT_NEAR(m.equilibrium_survival(t), oracle::gamma21_equilibrium_survival(t), 1e-12);
  RandomStream rng(5);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = m.sample_equilibrium(rng);
  const auto ks =
      stats::ks_one_sample(xs, [](double t) { return 1.0 - oracle::gamma21_equilibrium_survival(t); });
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(Sampling, OffspringDisplacementExponential) {
  const auto k = ExcitationKernel::exponential(0.5, 2.0);
  RandomStream rng(9);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_offspring_displacement(k, rng);
  const auto s = stats::summarize(xs);
  EXPECT_LT(std::abs(s.mean - 0.5), 3.0 * s.standard_error);
  const auto ks = stats::ks_one_sample(xs, [](double t) { return 1.0 - std::exp(-2.0 * t); });
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(Sampling, OffspringDisplacementTabulated) {
  const auto k = ExcitationKernel::tabulated({0.0, 1.0, 2.0}, {0.0, 0.3, 0.0});
  RandomStream rng(13);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_offspring_displacement(k, rng);
  const auto ks = stats::ks_one_sample(xs, oracle::triangle_cdf);
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(Sampling, ZeroKernelHasNoOffspring) {
  RandomStream rng(1);
  try {
    (void)sample_offspring_displacement(ExcitationKernel::zero(), rng);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate kernel has no offspring"), std::string::npos);
  }
}

TEST(Sampling, PoissonAndNormalMoments) {
  RandomStream rng(21);
  for (double mean : {0.5, 4.0, 75.0}) {
    std::vector<double> xs(50000);
    for (auto& x : xs) x = static_cast<double>(rng.poisson(mean));
    const auto s = stats::summarize(xs);
    EXPECT_LT(std::abs(s.mean - mean), 3.0 * s.standard_error) << mean;
    EXPECT_NEAR(s.variance / mean, 1.0, 0.05) << mean;
  }
  std::vector<double> zs(50000);
  for (auto& z : zs) z = rng.standard_normal();
  const auto ks = stats::ks_one_sample(zs, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
  EXPECT_GT(ks.p_value, 0.01);
}
