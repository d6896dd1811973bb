#pragma once

// Satellite clusters: an immigrant at t0 and all generations of its
// offspring. Each node independently spawns Poisson(alpha) children displaced
// by i.i.d. draws from h / alpha, so generation sizes Z_n form a
// Galton–Watson process and the total size follows the Borel law.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "rhp/distributions.hpp"
#include "rhp/error.hpp"
#include "rhp/random.hpp"

namespace rhp {

inline constexpr std::size_t kDefaultNodeCap = 10'000'000;

struct ClusterNode {
  double time = 0.0;
  int generation = 0;
  std::optional<std::size_t> parent;
};

/// Nodes in generation (breadth-first) order; nodes[0] is the root.
struct ClusterTree {
  double root_time = 0.0;
  std::vector<ClusterNode> nodes;

  std::size_t size() const noexcept { return nodes.size(); }

  /// Z_n, the number of nodes in generation n.
  std::size_t generation_size(int n) const {
    std::size_t z = 0;
    for (const auto& node : nodes)
      if (node.generation == n) ++z;
    return z;
  }
};

/// Simulates the cluster rooted at t0. With a finite horizon, a child placed
/// beyond it is dropped together with its would-be subtree (displacements
/// are positive, so no descendant could return to the window).
inline ClusterTree simulate_cluster(const ExcitationKernel& kernel, double t0, double horizon, RandomStream& rng,
                                    std::size_t node_cap = kDefaultNodeCap) {
  const double alpha = kernel_mass(kernel);
  ClusterTree tree;
  tree.root_time = t0;
  tree.nodes.push_back(ClusterNode{t0, 0, std::nullopt});
  if (alpha == 0.0) return tree;
  for (std::size_t head = 0; head < tree.nodes.size(); ++head) {
    const double parent_time = tree.nodes[head].time;
    const int child_generation = tree.nodes[head].generation + 1;
    const std::uint64_t children = rng.poisson(alpha);
    for (std::uint64_t c = 0; c < children; ++c) {
      const double t = parent_time + kernel.sample_displacement(rng);
      if (t > horizon) continue;
      tree.nodes.push_back(ClusterNode{t, child_generation, head});
      if (tree.nodes.size() > node_cap)
        throw Error("cluster exceeded the node cap of " + std::to_string(node_cap) + " nodes");
    }
  }
  return tree;
}

inline ClusterTree simulate_cluster(const ExcitationKernel& kernel, double t0, RandomStream& rng) {
  return simulate_cluster(kernel, t0, kInf, rng);
}

/// E[Z] = 1 / (1 - alpha).
inline double mean_cluster_size(double alpha) {
  if (!(alpha >= 0.0)) throw Error("alpha must be >= 0");
  if (!(alpha < 1.0)) throw Error("mean cluster size is infinite: alpha must be < 1 (subcriticality violated)");
  return 1.0 / (1.0 - alpha);
}

/// P(Z = n) = e^{-alpha n} (alpha n)^{n-1} / n!  (Borel law).
inline double borel_pmf(double alpha, std::uint64_t n) {
  if (n == 0) return 0.0;
  const double x = static_cast<double>(n);
  return std::exp(-alpha * x + (x - 1.0) * std::log(alpha * x) - boost::math::lgamma(x + 1.0));
}

/// p.g.f. pi(u) = sum_n u^n P(Z = n), summed until terms are negligible.
inline double borel_pgf(double alpha, double u) {
  double sum = 0.0;
  for (std::uint64_t n = 1; n < 1'000'000; ++n) {
    const double term = std::pow(u, static_cast<double>(n)) * borel_pmf(alpha, n);
    sum += term;
    if (n > 10 && term < 1e-18 * sum) break;
  }
  return sum;
}

/// |pi(u) - u exp(alpha (pi(u) - 1))|.
inline double borel_pgf_residual(double alpha, double u) {
  const double p = borel_pgf(alpha, u);
  return std::abs(p - u * std::exp(alpha * (p - 1.0)));
}

/// pmf of the total cluster size over {1, ..., n_max}; element i holds
/// P(Z = i + 1). Verifies the functional equation of the p.g.f. on
/// u = 0.1, ..., 0.9 before returning.
inline std::vector<double> cluster_size_pmf(double alpha, std::uint64_t n_max) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("cluster_size_pmf requires 0 < alpha < 1");
  for (int k = 1; k <= 9; ++k) {
    const double r = borel_pgf_residual(alpha, 0.1 * k);
    if (!(r <= 1e-8)) throw Error("Borel p.g.f. fails its functional equation (residual " + std::to_string(r) + ")");
  }
  std::vector<double> pmf(n_max);
  for (std::uint64_t n = 1; n <= n_max; ++n) pmf[n - 1] = borel_pmf(alpha, n);
  return pmf;
}

struct GenerationStats {
  int generation = 0;
  std::size_t trees = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance (n - 1 denominator)
  double standard_error = 0.0;
  /// histogram[k] = number of trees with Z_n = k.
  std::vector<std::size_t> histogram;
};

/// Empirical law of Z_n across trees (simulated with an infinite horizon).
inline GenerationStats generation_counts(const std::vector<ClusterTree>& trees, int n) {
  GenerationStats s;
  s.generation = n;
  s.trees = trees.size();
  if (trees.empty()) return s;
  double sum = 0.0;
  double sumsq = 0.0;
  for (const auto& tree : trees) {
    const std::size_t z = tree.generation_size(n);
    if (s.histogram.size() <= z) s.histogram.resize(z + 1, 0);
    ++s.histogram[z];
    sum += static_cast<double>(z);
    sumsq += static_cast<double>(z) * static_cast<double>(z);
  }
  const double count = static_cast<double>(trees.size());
  s.mean = sum / count;
  if (trees.size() > 1) s.variance = (sumsq - count * s.mean * s.mean) / (count - 1.0);
  s.standard_error = std::sqrt(std::max(0.0, s.variance) / count);
  return s;
}

}  // namespace rhp
