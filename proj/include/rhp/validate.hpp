#pragma once

// Empirical checks of the theory: time rescaling of the intensity, agreement
// of the two simulators, existence preconditions, stationarity of the
// stationary version and convergence of the plain process towards it, and
// the Galton–Watson laws of cluster sizes and generations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rhp/cluster.hpp"
#include "rhp/distributions.hpp"
#include "rhp/error.hpp"
#include "rhp/events.hpp"
#include "rhp/parallel.hpp"
#include "rhp/random.hpp"
#include "rhp/renewal.hpp"
#include "rhp/simulate.hpp"
#include "rhp/stats.hpp"

namespace rhp {

/// One row of a report: a single sub-test or condition.
struct DiagnosticsDetail {
  std::string label;
  double statistic = 0.0;
  double p_value = 1.0;
  double threshold = 0.0;  // critical value or level the row was judged against
  bool pass = true;
  std::string note;
};

struct DiagnosticsReport {
  std::string test;
  double statistic = 0.0;
  double p_value = 1.0;
  double level = 0.01;
  bool pass = true;
  std::vector<std::size_t> sample_sizes;
  std::vector<DiagnosticsDetail> detail;
  std::string message;
};

/// Compensator gaps of a stream: Lambda(t_1) - Lambda(t_0), ... with t_0 = 0.
/// An event at the origin is deterministic and contributes no gap.
inline std::vector<double> rescaled_gaps(const EventStream& stream, const RenewalModel& model,
                                         const ExcitationKernel& kernel) {
  std::vector<double> gaps;
  double prev = 0.0;
  for (const auto& e : stream.events) {
    if (e.time <= 0.0) continue;
    const double lam = compensator(stream, model, kernel, e.time);
    gaps.push_back(lam - prev);
    prev = lam;
  }
  return gaps;
}

inline constexpr std::size_t kMinRescalingGaps = 100;

/// Pools rescaled gaps across streams and tests them against Exp(1).
inline DiagnosticsReport time_rescaling_test(const std::vector<EventStream>& streams, const RenewalModel& model,
                                             const ExcitationKernel& kernel, double level = 0.01) {
  std::vector<std::vector<double>> per_stream(streams.size());
  parallel_for(streams.size(), [&](std::size_t i) { per_stream[i] = rescaled_gaps(streams[i], model, kernel); });
  std::vector<double> pooled;
  for (auto& g : per_stream) pooled.insert(pooled.end(), g.begin(), g.end());
  if (pooled.size() < kMinRescalingGaps)
    throw Error("time-rescaling test needs at least " + std::to_string(kMinRescalingGaps) + " pooled gaps, got " +
                std::to_string(pooled.size()));
  const auto ks = stats::ks_one_sample(pooled, [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); });
  DiagnosticsReport r;
  r.test = "rescaling";
  r.statistic = ks.statistic;
  r.p_value = ks.p_value;
  r.level = level;
  r.pass = ks.p_value > level;
  r.sample_sizes = {pooled.size(), streams.size()};
  const auto summary = stats::summarize(pooled);
  r.detail.push_back({"ks_exp1", ks.statistic, ks.p_value, level, r.pass,
                      "pooled gaps " + std::to_string(pooled.size()) + ", mean " + std::to_string(summary.mean)});
  return r;
}

/// Consecutive equal windows covering (0, horizon].
inline std::vector<std::pair<double, double>> equal_windows(double horizon, std::size_t count) {
  if (count == 0) throw Error("need at least one window");
  std::vector<std::pair<double, double>> w;
  const double len = horizon / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i)
    w.emplace_back(len * static_cast<double>(i), i + 1 == count ? horizon : len * static_cast<double>(i + 1));
  return w;
}

struct CrossSimulatorSetup {
  RenewalModel model;
  ExcitationKernel kernel;
  double horizon = 100.0;
  Convention convention;
  ThinningOptions thinning;
};

/// Two-sample KS on N(window) between replicate sets from `method_a` and
/// `method_b`, Bonferroni-corrected across windows. Both sets use disjoint
/// substreams, so the same method on both sides is a split-sample check.
inline DiagnosticsReport cross_simulator_test(const CrossSimulatorSetup& setup, SimMethod method_a,
                                              SimMethod method_b, std::size_t reps,
                                              const std::vector<std::pair<double, double>>& windows,
                                              std::uint64_t seed, double level = 0.01) {
  if (reps == 0) throw Error("cross-simulator test needs reps > 0");
  if (windows.empty()) throw Error("cross-simulator test needs at least one window");
  const auto a = simulate_replicates(method_a, setup.model, setup.kernel, setup.horizon, setup.convention, reps, seed,
                                     setup.thinning);
  // Second set from the substreams following the first.
  std::vector<EventStream> b(reps);
  parallel_for(reps, [&](std::size_t i) {
    RandomStream rng = RandomStream::substream(seed, reps + i);
    b[i] = simulate_rhp(method_b, setup.model, setup.kernel, setup.horizon, setup.convention, rng, setup.thinning);
  });
  const double corrected = level / static_cast<double>(windows.size());
  DiagnosticsReport r;
  r.test = "cross";
  r.level = level;
  r.sample_sizes = {reps, reps};
  r.p_value = 1.0;
  std::ostringstream msg;
  msg << to_string(method_a) << " vs " << to_string(method_b) << ", Bonferroni level " << corrected;
  r.message = msg.str();
  for (const auto& [lo, hi] : windows) {
    std::vector<double> ca(reps), cb(reps);
    for (std::size_t i = 0; i < reps; ++i) {
      ca[i] = static_cast<double>(a[i].count_in(lo, hi));
      cb[i] = static_cast<double>(b[i].count_in(lo, hi));
    }
    const auto ks = stats::ks_two_sample(ca, cb);
    const bool ok = ks.p_value > corrected;
    std::ostringstream label;
    label << "N((" << lo << ", " << hi << "])";
    std::ostringstream note;
    note << "means " << stats::summarize(ca).mean << " / " << stats::summarize(cb).mean;
    r.detail.push_back({label.str(), ks.statistic, ks.p_value, corrected, ok, note.str()});
    r.statistic = std::max(r.statistic, ks.statistic);
    r.p_value = std::min(r.p_value, ks.p_value);
    r.pass = r.pass && ok;
  }
  // Report the Bonferroni-adjusted minimum p-value.
  r.p_value = std::min(1.0, r.p_value * static_cast<double>(windows.size()));
  return r;
}

/// Finite-cluster conditions and the standing assumptions, each reported as a
/// row. `interval` is the length |I| of the test interval in condition (i).
inline DiagnosticsReport existence_preconditions(const RenewalModel& model, const ExcitationKernel& kernel,
                                                 double interval = 1.0) {
  DiagnosticsReport r;
  r.test = "existence";
  r.level = 0.0;

  double alpha = kernel.alpha();
  bool subcritical = true;
  std::string sub_note = "alpha = " + std::to_string(alpha);
  try {
    alpha = kernel_mass(kernel);
  } catch (const Error& e) {
    subcritical = false;
    sub_note = e.what();
  }
  r.detail.push_back({"assumption_A_subcritical", alpha, 1.0, 1.0, subcritical, sub_note});

  const double mean = model.mean_interarrival();
  const bool finite_mean = std::isfinite(mean);
  r.detail.push_back({"assumption_B_finite_mean", mean, 1.0, 0.0, finite_mean,
                      finite_mean ? "m = " + std::to_string(1.0 / mean)
                                  : "mean interarrival is not finite; no stationary version exists"});

  // (i) sup_t E[N_R(I - t)] <= Phi(|I|) by subadditivity.
  double phi = kInf;
  std::string phi_note;
  try {
    if (model.has_density()) {
      const RenewalTable table = renewal_table(model, interval, interval / 1000.0);
      phi = table.phi_fn.back();
      phi_note = "Phi(|I|) from renewal table";
    } else {
      const double f = model.cdf(interval);
      phi = f < 1.0 ? 1.0 / (1.0 - f) : kInf;
      phi_note = "Phi(|I|) <= 1 / (1 - F(|I|))";
    }
  } catch (const Error& e) {
    phi_note = e.what();
  }
  r.detail.push_back({"condition_i_bounded_centre", phi, 1.0, 0.0, std::isfinite(phi), phi_note});

  r.detail.push_back({"condition_ii_shift_equivariant", 0.0, 1.0, 0.0, true,
                      "satellites are shifts of one cluster law by construction"});

  r.detail.push_back({"condition_iii_finite_satellite_mean", alpha, 1.0, 1.0, subcritical,
                      subcritical ? "E[N_s] = alpha < inf" : sub_note});

  for (const auto& d : r.detail) r.pass = r.pass && d.pass;
  r.statistic = alpha;
  r.p_value = r.pass ? 1.0 : 0.0;
  if (!subcritical) r.message = sub_note;
  else if (!finite_mean) r.message = "assumption (B) violated: infinite mean interarrival";
  return r;
}

struct StationarityOptions {
  double level = 0.01;
  /// Rate tolerance in standard errors.
  double rate_sigmas = 3.0;
  Convention plain{true, DelayKind::none};
};

/// (a) Window counts of the stationary version agree across shifts (pairwise
///     two-sample KS on independent replicate sets, Bonferroni over pairs).
/// (b) The KS distance between plain and stationary window counts is
///     nonincreasing in the shift up to the critical value, and below it at
///     the largest shift.
/// (c) The stationary mean rate is within `rate_sigmas` SE of m / (1 - alpha).
inline DiagnosticsReport stationarity_and_convergence(const RenewalModel& model, const ExcitationKernel& kernel,
                                                      const std::vector<double>& shifts, double window,
                                                      std::size_t reps, std::uint64_t seed,
                                                      const StationarityOptions& options = {}) {
  if (shifts.size() < 2) throw Error("stationarity check needs at least two shifts");
  for (std::size_t i = 1; i < shifts.size(); ++i)
    if (!(shifts[i] > shifts[i - 1])) throw Error("shifts must be increasing");
  if (!(shifts.front() >= 0.0) || !(window > 0.0)) throw Error("shifts must be >= 0 and the window > 0");
  if (reps < 2) throw Error("stationarity check needs reps >= 2");
  const double alpha = kernel_mass(kernel);
  if (!std::isfinite(model.mean_interarrival()))
    throw Error("stationary version needs a finite mean interarrival (assumption B)");
  const double horizon = shifts.back() + window;
  const std::size_t k = shifts.size();

  // counts[s][r]: stationary set s (one independent set per shift).
  std::vector<std::vector<double>> stationary(k, std::vector<double>(reps));
  std::vector<std::vector<double>> plain(k, std::vector<double>(reps));
  parallel_for(reps * (k + 1), [&](std::size_t job) {
    const std::size_t set = job / reps;
    const std::size_t rep = job % reps;
    RandomStream rng = RandomStream::substream(seed, job);
    if (set < k) {
      const auto s = simulate_rhp_stationary(model, kernel, horizon, rng);
      stationary[set][rep] = static_cast<double>(s.count_in(shifts[set], shifts[set] + window));
    } else {
      const auto s = simulate_rhp_cluster(model, kernel, horizon, options.plain, rng);
      for (std::size_t j = 0; j < k; ++j) plain[j][rep] = static_cast<double>(s.count_in(shifts[j], shifts[j] + window));
    }
  });

  DiagnosticsReport r;
  r.test = "stationarity";
  r.level = options.level;
  r.sample_sizes = {reps, k};
  r.p_value = 1.0;

  const std::size_t pairs = k * (k - 1) / 2;
  const double pair_level = options.level / static_cast<double>(pairs);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const auto ks = stats::ks_two_sample(stationary[i], stationary[j]);
      const bool ok = ks.p_value > pair_level;
      std::ostringstream label;
      label << "stationary shift " << shifts[i] << " vs " << shifts[j];
      r.detail.push_back({label.str(), ks.statistic, ks.p_value, pair_level, ok, ""});
      r.p_value = std::min(r.p_value, ks.p_value);
      r.pass = r.pass && ok;
    }
  r.p_value = std::min(1.0, r.p_value * static_cast<double>(pairs));

  const double critical = stats::ks_two_sample_critical(reps, reps, options.level);
  double previous = kInf;
  for (std::size_t j = 0; j < k; ++j) {
    const auto ks = stats::ks_two_sample(plain[j], stationary[j]);
    const bool monotone = ks.statistic <= previous + critical;
    const bool last = j + 1 == k;
    const bool ok = monotone && (!last || ks.statistic < critical);
    std::ostringstream label;
    label << "plain vs stationary at shift " << shifts[j];
    std::ostringstream note;
    note << (monotone ? "nonincreasing within noise" : "distance increased beyond noise");
    if (last) note << (ks.statistic < critical ? "; below critical value" : "; not below critical value");
    r.detail.push_back({label.str(), ks.statistic, ks.p_value, critical, ok, note.str()});
    r.pass = r.pass && ok;
    previous = ks.statistic;
    if (last) r.statistic = ks.statistic;
  }

  const double target = model.rate() / (1.0 - alpha);
  for (std::size_t j = 0; j < k; ++j) {
    const auto s = stats::summarize(stationary[j]);
    const double rate = s.mean / window;
    const double se = s.standard_error / window;
    const double z = se > 0.0 ? (rate - target) / se : (rate == target ? 0.0 : kInf);
    const bool ok = std::abs(z) <= options.rate_sigmas;
    std::ostringstream label;
    label << "stationary rate at shift " << shifts[j];
    std::ostringstream note;
    note << "rate " << rate << " vs m/(1-alpha) = " << target << " (SE " << se << ")";
    r.detail.push_back({label.str(), z, 1.0, options.rate_sigmas, ok, note.str()});
    r.pass = r.pass && ok;
  }
  return r;
}

/// Borel law of the total cluster size: chi-square of simulated sizes.
inline DiagnosticsReport cluster_size_test(const ExcitationKernel& kernel, std::size_t clusters, std::uint64_t seed,
                                           double level = 0.01) {
  const double alpha = kernel_mass(kernel);
  std::vector<std::size_t> sizes(clusters);
  parallel_for(clusters, [&](std::size_t i) {
    RandomStream rng = RandomStream::substream(seed, i);
    sizes[i] = simulate_cluster(kernel, 0.0, rng).size();
  });
  const std::size_t largest = *std::max_element(sizes.begin(), sizes.end());
  std::vector<std::size_t> observed(largest + 1, 0);
  for (auto s : sizes) ++observed[s];
  // probabilities[k] = P(Z = k); P(Z = 0) = 0.
  const auto pmf = cluster_size_pmf(alpha, std::max<std::size_t>(largest, 2));
  std::vector<double> probabilities(pmf.size() + 1, 0.0);
  for (std::size_t n = 1; n <= pmf.size(); ++n) probabilities[n] = pmf[n - 1];
  const auto chi = stats::chi_square_gof(observed, probabilities);

  std::vector<double> as_double(sizes.begin(), sizes.end());
  const auto s = stats::summarize(as_double);
  const double mean = mean_cluster_size(alpha);
  const double z = (s.mean - mean) / s.standard_error;

  DiagnosticsReport r;
  r.test = "cluster-size";
  r.level = level;
  r.sample_sizes = {clusters};
  r.statistic = chi.statistic;
  r.p_value = chi.p_value;
  r.detail.push_back({"borel_chi_square", chi.statistic, chi.p_value, level, chi.p_value > level,
                      std::to_string(chi.bins) + " bins"});
  r.detail.push_back({"mean_size", z, 1.0, 3.0, std::abs(z) <= 3.0,
                      "mean " + std::to_string(s.mean) + " vs 1/(1-alpha) = " + std::to_string(mean)});
  for (const auto& d : r.detail) r.pass = r.pass && d.pass;
  return r;
}

/// Z_1 ~ Poisson(alpha) by chi-square, and E[Z_n] = alpha^n for n <= max_generation.
inline DiagnosticsReport generation_test(const ExcitationKernel& kernel, std::size_t clusters, int max_generation,
                                         std::uint64_t seed, double level = 0.01) {
  const double alpha = kernel_mass(kernel);
  std::vector<ClusterTree> trees(clusters);
  parallel_for(clusters, [&](std::size_t i) {
    RandomStream rng = RandomStream::substream(seed, i);
    trees[i] = simulate_cluster(kernel, 0.0, rng);
  });
  DiagnosticsReport r;
  r.test = "generations";
  r.level = level;
  r.sample_sizes = {clusters};

  const auto g1 = generation_counts(trees, 1);
  std::vector<double> poisson(g1.histogram.size() + 1);
  for (std::size_t k = 0; k < poisson.size(); ++k)
    poisson[k] = std::exp(-alpha + static_cast<double>(k) * std::log(alpha) - std::lgamma(static_cast<double>(k) + 1.0));
  const auto chi = stats::chi_square_gof(g1.histogram, poisson);
  r.statistic = chi.statistic;
  r.p_value = chi.p_value;
  r.detail.push_back({"Z1_poisson_chi_square", chi.statistic, chi.p_value, level, chi.p_value > level,
                      std::to_string(chi.bins) + " bins"});
  for (int n = 1; n <= max_generation; ++n) {
    const auto g = generation_counts(trees, n);
    const double expected = std::pow(alpha, n);
    const double z = g.standard_error > 0.0 ? (g.mean - expected) / g.standard_error : 0.0;
    r.detail.push_back({"E[Z_" + std::to_string(n) + "]", z, 1.0, 3.0, std::abs(z) <= 3.0,
                        "mean " + std::to_string(g.mean) + " vs alpha^n = " + std::to_string(expected)});
  }
  for (const auto& d : r.detail) r.pass = r.pass && d.pass;
  return r;
}

}  // namespace rhp
