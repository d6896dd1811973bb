#pragma once

// Probability generating functionals G[z] = E[prod_{t in N} z(t)].
//
// The cluster p.g.fl. u(x) = G_c[z_x | 0], with z_x = z(x + .), solves
//     u(x) = z(x) exp( integral_0^inf (u(x + y) - 1) h(y) dy ),
// and G_c[z | t] = u(t). The stationary renewal Hawkes p.g.fl. is the
// stationary renewal p.g.fl. evaluated at u, expanded in factorial moments
// with densities m phi(t2 - t1) ... phi(tk - t(k-1)) on t1 < ... < tk.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rhp/cluster.hpp"
#include "rhp/distributions.hpp"
#include "rhp/error.hpp"
#include "rhp/parallel.hpp"
#include "rhp/piecewise_linear.hpp"
#include "rhp/random.hpp"
#include "rhp/renewal.hpp"
#include "rhp/simulate.hpp"

namespace rhp {

/// Test function z with values in (0, 1]. Outside its support z is 1;
/// the constant representation has unbounded support.
class TestFunction {
 public:
  static TestFunction constant(double z0) {
    check_value(z0);
    TestFunction f;
    f.rep_ = Constant{z0};
    return f;
  }

  /// z0 on [a, b], 1 elsewhere.
  static TestFunction step(double z0, double a, double b) {
    check_value(z0);
    if (!(a >= 0.0 && b > a) || !std::isfinite(b)) throw Error("step test function needs 0 <= a < b < inf");
    TestFunction f;
    f.rep_ = Step{z0, a, b};
    return f;
  }

  /// Linear interpolation on the grid, 1 outside [grid.front(), grid.back()].
  static TestFunction tabulated(std::vector<double> grid, std::vector<double> values) {
    for (double v : values) check_value(v);
    std::vector<double> deficit(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) deficit[i] = 1.0 - values[i];
    TestFunction f;
    f.rep_ = Tabulated{PiecewiseLinear(std::move(grid), std::move(deficit))};
    return f;
  }

  /// Parses "const:Z0", "step:Z0:A:B" or "one".
  static TestFunction parse(std::string_view spec) {
    std::vector<double> nums;
    const auto colon = spec.find(':');
    const std::string_view kind = spec.substr(0, colon);
    std::string_view rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    while (!rest.empty()) {
      const auto next = rest.find(':');
      const std::string_view tok = rest.substr(0, next);
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw Error("bad number '" + std::string(tok) + "' in test function spec '" + std::string(spec) + "'");
      nums.push_back(v);
      rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next + 1);
    }
    if (kind == "one" && nums.empty()) return constant(1.0);
    if (kind == "const" && nums.size() == 1) return constant(nums[0]);
    if (kind == "step" && nums.size() == 3) return step(nums[0], nums[1], nums[2]);
    throw Error("bad test function spec '" + std::string(spec) + "' (expected const:Z0 or step:Z0:A:B)");
  }

  double operator()(double x) const {
    if (const auto* c = std::get_if<Constant>(&rep_)) return c->z0;
    if (const auto* s = std::get_if<Step>(&rep_)) return (x >= s->a && x <= s->b) ? s->z0 : 1.0;
    return 1.0 - std::get<Tabulated>(rep_).deficit.value(x);
  }

  bool unbounded_support() const noexcept {
    const auto* c = std::get_if<Constant>(&rep_);
    return c && c->z0 != 1.0;
  }

  bool is_one() const noexcept {
    const auto* c = std::get_if<Constant>(&rep_);
    return c && c->z0 == 1.0;
  }

  /// Right end b of the region where z may differ from 1 (0 for z == 1,
  /// +inf for a non-unit constant).
  double support_bound() const noexcept {
    if (const auto* c = std::get_if<Constant>(&rep_)) return c->z0 == 1.0 ? 0.0 : kInf;
    if (const auto* s = std::get_if<Step>(&rep_)) return s->b;
    return std::get<Tabulated>(rep_).deficit.support_end();
  }

  std::optional<double> constant_value() const {
    if (const auto* c = std::get_if<Constant>(&rep_)) return c->z0;
    return std::nullopt;
  }

  std::string describe() const {
    auto num = [](double v) {
      char buf[32];
      return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
    };
    if (const auto* c = std::get_if<Constant>(&rep_)) return "const:" + num(c->z0);
    if (const auto* s = std::get_if<Step>(&rep_)) return "step:" + num(s->z0) + ":" + num(s->a) + ":" + num(s->b);
    return "tabulated";
  }

 private:
  struct Constant {
    double z0;
  };
  struct Step {
    double z0, a, b;
  };
  struct Tabulated {
    PiecewiseLinear deficit;  // 1 - z
  };

  static void check_value(double v) {
    if (!(v > 0.0 && v <= 1.0)) throw Error("test function values must lie in (0, 1]");
  }

  std::variant<Constant, Step, Tabulated> rep_ = Constant{1.0};
};

/// u(x) = G_c[z_x | 0] on a uniform grid over [0, b]; u = tail_value beyond.
struct PgflSolution {
  std::vector<double> grid;
  std::vector<double> u_values;
  double tail_value = 1.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::vector<double> residual_history;

  double step() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
  double support_bound() const { return grid.empty() ? 0.0 : grid.back(); }

  /// G_c[z | t] for t >= 0.
  double at(double x) const {
    if (grid.size() < 2 || x > grid.back()) return tail_value;
    if (x <= 0.0) return u_values.front();
    const double pos = x / step();
    const auto i = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
    const double w = pos - static_cast<double>(i);
    return u_values[i] + w * (u_values[i + 1] - u_values[i]);
  }
};

struct PgflOptions {
  double tolerance = 1e-10;
  /// Grid step for u; defaults to b / 1000.
  std::optional<double> grid_step;
  std::size_t max_iterations = 10'000;
};

/// Fixed-point iteration u_{k+1} = z exp(integral (u_k(x + .) - 1) h) from
/// u_0 = 1. The integral over [0, b - x] uses the composite trapezoid rule;
/// the part beyond b vanishes because u = 1 there. A non-unit constant z
/// gives a constant u solving the scalar equation pi = z0 exp(alpha (pi - 1)).
inline PgflSolution solve_cluster_pgfl(const ExcitationKernel& kernel, const TestFunction& z,
                                       const PgflOptions& options = {}) {
  const double alpha = kernel_mass(kernel);
  PgflSolution sol;
  if (z.is_one()) {
    sol.grid = {0.0};
    sol.u_values = {1.0};
    return sol;
  }
  if (z.unbounded_support()) {
    const double z0 = *z.constant_value();
    double pi = 1.0;
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
      const double next = z0 * std::exp(alpha * (pi - 1.0));
      const double change = std::abs(next - pi);
      pi = next;
      sol.residual_history.push_back(change);
      sol.iterations = it;
      sol.residual = change;
      if (change < options.tolerance) break;
    }
    if (!(sol.residual < options.tolerance)) throw Error("cluster p.g.fl. iteration did not converge");
    sol.grid = {0.0};
    sol.u_values = {pi};
    sol.tail_value = pi;
    return sol;
  }

  const double b = z.support_bound();
  const double requested = options.grid_step.value_or(b / 1000.0);
  if (!(requested > 0.0)) throw Error("p.g.fl. grid step must be > 0");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(b / requested - 1e-9)));
  const double dx = b / static_cast<double>(n);
  sol.grid.resize(n + 1);
  std::vector<double> zv(n + 1);
  std::vector<double> hv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    sol.grid[i] = dx * static_cast<double>(i);
    zv[i] = z(sol.grid[i]);
    hv[i] = kernel.value(sol.grid[i]);
  }
  std::vector<double> u(n + 1, 1.0);
  std::vector<double> next(n + 1);
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const std::size_t len = n - i;  // integrate y over [0, len * dx]
      double integral = 0.0;
      if (len > 0) {
        integral = 0.5 * (u[i] - 1.0) * hv[0] + 0.5 * (u[n] - 1.0) * hv[len];
        for (std::size_t j = 1; j < len; ++j) integral += (u[i + j] - 1.0) * hv[j];
        integral *= dx;
      }
      next[i] = zv[i] * std::exp(integral);
      change = std::max(change, std::abs(next[i] - u[i]));
    }
    u.swap(next);
    sol.residual_history.push_back(change);
    sol.iterations = it;
    sol.residual = change;
    if (change < options.tolerance) break;
  }
  if (!(sol.residual < options.tolerance))
    throw Error("cluster p.g.fl. iteration did not converge in " + std::to_string(options.max_iterations) +
                " iterations (residual " + std::to_string(sol.residual) + ")");
  sol.u_values = std::move(u);
  sol.tail_value = 1.0;
  return sol;
}

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t reps = 0;
};

namespace detail {
inline McEstimate mean_and_se(const std::vector<double>& values) {
  McEstimate e;
  e.reps = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  e.estimate = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - e.estimate) * (v - e.estimate);
  if (values.size() > 1) e.standard_error = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                                                      static_cast<double>(values.size()));
  return e;
}
}  // namespace detail

/// Monte Carlo G_c[z | t0]: mean of prod z over clusters rooted at t0.
inline McEstimate mc_pgfl_cluster(const ExcitationKernel& kernel, const TestFunction& z, double t0, std::size_t reps,
                                  RandomStream& rng) {
  if (reps < 100) throw Error("mc_pgfl_cluster needs reps >= 100");
  const double horizon = z.support_bound();  // z = 1 beyond, so the subtree there contributes 1
  std::vector<double> values(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const ClusterTree tree = simulate_cluster(kernel, t0, std::max(horizon, t0), rng);
    double prod = 1.0;
    for (const auto& node : tree.nodes) prod *= z(node.time);
    values[r] = prod;
  }
  return detail::mean_and_se(values);
}

/// Monte Carlo G[z] of the full process simulated by `method`.
inline McEstimate mc_pgfl_process(SimMethod method, const RenewalModel& model, const ExcitationKernel& kernel,
                                  const TestFunction& z, const Convention& convention, std::size_t reps,
                                  std::uint64_t seed) {
  if (z.unbounded_support()) throw Error("process p.g.fl. needs a test function of bounded support");
  const double horizon = std::max(z.support_bound(), 1e-9);
  std::vector<double> values(reps);
  parallel_for(reps, [&](std::size_t r) {
    RandomStream rng = RandomStream::substream(seed, r);
    const EventStream s = simulate_rhp(method, model, kernel, horizon, convention, rng);
    double prod = 1.0;
    for (const auto& e : s.events) prod *= z(e.time);
    values[r] = prod;
  });
  return detail::mean_and_se(values);
}

struct TruncatedPgfl {
  double value = 0.0;
  /// terms[n] = E[prod z over S_1..S_n ; N((0,T]) = n] (before the origin factor).
  std::vector<double> terms;
  /// P(N((0,T]) > n_max), the omitted mass.
  double tail_bound = 0.0;
};

struct TruncatedPgflOptions {
  /// Quadrature grid step; defaults to T / 2000.
  std::optional<double> grid_step;
  /// Largest acceptable omitted-tail probability.
  double accuracy = 1e-5;
};

/// G_R[z^T], z^T = z on [0,T] and 1 beyond, as the sum over n <= n_max of
///   integral_{0<s1<...<sn<=T} z(s1)..z(sn) f(s1) f(s2-s1)..f(sn-s(n-1)) (1 - F(T - sn)) ds
/// (n = 0 term: 1 - F(T)), times z(0) when the origin is an event. Nested
/// integrals are evaluated by repeated trapezoidal convolution on a grid.
/// With a stationary convention the first gap has density m (1 - F).
inline TruncatedPgfl renewal_pgfl_truncated(const RenewalModel& model, const TestFunction& z, double T,
                                            std::size_t n_max, const Convention& convention,
                                            const TruncatedPgflOptions& options = {}) {
  if (!(T > 0.0)) throw Error("truncation time T must be > 0");
  if (n_max > 256) throw Error("n_max above 256 is not supported by the quadrature path; use the MC estimator");
  if (!model.has_density()) throw Error("truncated renewal p.g.fl. requires a model with a density");
  if (convention.delay == DelayKind::explicit_law) throw Error("explicit delay laws are not supported");
  const bool stationary = convention.delay == DelayKind::stationary;
  const double step = options.grid_step.value_or(T / 2000.0);
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(T / step - 1e-9)));
  const double dx = T / static_cast<double>(n);

  std::vector<double> s(n + 1), f(n + 1), f_first(n + 1), zv(n + 1), surv_to_T(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    s[i] = dx * static_cast<double>(i);
    f[i] = model.density(s[i]);
    f_first[i] = stationary ? model.rate() * model.survival(s[i]) : f[i];
    zv[i] = z(s[i]);
    surv_to_T[i] = model.survival(T - s[i]);
  }
  if (!std::isfinite(f[0])) throw Error("renewal density is singular at the origin; quadrature path unsupported");

  auto convolve = [&](const std::vector<double>& g) {
    // (f * g)(s_i) by the trapezoid rule.
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
      double acc = 0.5 * (f[i] * g[0] + f[0] * g[i]);
      for (std::size_t j = 1; j < i; ++j) acc += f[i - j] * g[j];
      out[i] = acc * dx;
    }
    return out;
  };
  auto trapezoid = [&](const std::vector<double>& g) {
    double acc = 0.5 * (g[0] + g[n]);
    for (std::size_t i = 1; i < n; ++i) acc += g[i];
    return acc * dx;
  };

  TruncatedPgfl out;
  out.terms.push_back(stationary ? model.equilibrium_survival(T) : model.survival(T));
  std::vector<double> g(n + 1);      // density of S_k weighted by z(S_1)..z(S_k)
  std::vector<double> plain(n + 1);  // density of S_k
  for (std::size_t i = 0; i <= n; ++i) {
    g[i] = zv[i] * f_first[i];
    plain[i] = f_first[i];
  }
  for (std::size_t k = 1; k <= n_max; ++k) {
    if (k > 1) {
      g = convolve(g);
      for (std::size_t i = 0; i <= n; ++i) g[i] *= zv[i];
      plain = convolve(plain);
    }
    std::vector<double> weighted(n + 1);
    for (std::size_t i = 0; i <= n; ++i) weighted[i] = g[i] * surv_to_T[i];
    out.terms.push_back(trapezoid(weighted));
  }
  // P(S_{n_max+1} <= T) is the mass omitted by truncating at n_max.
  plain = n_max == 0 ? plain : convolve(plain);
  out.tail_bound = std::max(0.0, trapezoid(plain));

  double sum = 0.0;
  for (double t : out.terms) sum += t;
  out.value = sum * (convention.origin_event() ? z(0.0) : 1.0);
  if (out.tail_bound > options.accuracy) {
    std::ostringstream msg;
    msg << "omitted tail P(N((0,T]) > " << n_max << ") = " << out.tail_bound << " exceeds the requested accuracy "
        << options.accuracy << "; increase n_max or use the Monte Carlo estimator";
    throw Error(msg.str());
  }
  return out;
}

inline constexpr std::size_t kMaxExpansionOrder = 3;

struct StationaryExpansion {
  /// partial_sums[k] = 1 + sum of the first k terms.
  std::vector<double> partial_sums;
  std::vector<double> terms;  // terms[k-1] is the order-k term
  double value = 1.0;
  double last_term = 0.0;
  bool converged = true;  // false: |last term| above tolerance (warning)
  double tolerance = 0.0;
};

/// Partial sums of the factorial-moment expansion of the stationary renewal
/// Hawkes p.g.fl.:
///   1 + sum_k m integral_{t1<...<tk} (u(t1)-1)..(u(tk)-1) phi(t2-t1)..phi(tk-t(k-1)) dt,
/// with u the cluster p.g.fl. solution and phi from `table`. The ordered
/// integrals are built by repeated trapezoidal convolution on u's grid.
inline StationaryExpansion stationary_pgfl_expansion(const RenewalModel& model, const PgflSolution& u,
                                                     std::size_t k_max, const RenewalTable& table,
                                                     double tolerance = 1e-3) {
  if (k_max < 1 || k_max > kMaxExpansionOrder) throw Error("k_max must lie in [1, 3]");
  if (!std::isfinite(model.mean_interarrival())) throw Error("stationary expansion needs a finite mean interarrival");
  if (u.tail_value != 1.0) throw Error("stationary expansion needs a test function of bounded support");
  StationaryExpansion out;
  out.tolerance = tolerance;
  out.partial_sums.push_back(1.0);
  if (u.grid.size() < 2) {  // z == 1
    for (std::size_t k = 1; k <= k_max; ++k) {
      out.terms.push_back(0.0);
      out.partial_sums.push_back(1.0);
    }
    return out;
  }
  const std::size_t n = u.grid.size() - 1;
  const double dx = u.step();
  if (table.horizon() < u.support_bound() * (1.0 - 1e-12))
    throw Error("renewal table horizon is shorter than the test function support");
  std::vector<double> v(n + 1), phi(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    v[i] = u.u_values[i] - 1.0;
    phi[i] = table.phi_density_at(u.grid[i]);
  }
  auto trapezoid = [&](const std::vector<double>& g) {
    double acc = 0.5 * (g[0] + g[n]);
    for (std::size_t i = 1; i < n; ++i) acc += g[i];
    return acc * dx;
  };
  std::vector<double> a(n + 1);
  for (std::size_t i = 0; i <= n; ++i) a[i] = model.rate() * v[i];
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (k > 1) {
      std::vector<double> next(n + 1, 0.0);
      for (std::size_t i = 1; i <= n; ++i) {
        double acc = 0.5 * (a[0] * phi[i] + a[i] * phi[0]);
        for (std::size_t j = 1; j < i; ++j) acc += a[j] * phi[i - j];
        next[i] = v[i] * acc * dx;
      }
      a.swap(next);
    }
    const double term = trapezoid(a);
    out.terms.push_back(term);
    out.partial_sums.push_back(out.partial_sums.back() + term);
  }
  out.value = out.partial_sums.back();
  out.last_term = out.terms.back();
  out.converged = std::abs(out.last_term) <= tolerance;
  return out;
}

/// Convenience overload: solves for u first.
inline StationaryExpansion stationary_pgfl_expansion(const RenewalModel& model, const ExcitationKernel& kernel,
                                                     const TestFunction& z, std::size_t k_max,
                                                     const RenewalTable& table, const PgflOptions& options = {},
                                                     double tolerance = 1e-3) {
  if (z.unbounded_support()) throw Error("stationary expansion needs a test function of bounded support");
  return stationary_pgfl_expansion(model, solve_cluster_pgfl(kernel, z, options), k_max, table, tolerance);
}

/// exp{ integral_0^inf mu (u(s) - 1) ds } for a Poisson centre of rate mu.
inline double hawkes_oakes_pgfl(double mu, const PgflSolution& u) {
  if (!(mu > 0.0)) throw Error("Poisson centre rate must be > 0");
  if (u.tail_value != 1.0) return 0.0;  // non-unit constant z: the integral diverges
  if (u.grid.size() < 2) return 1.0;
  const std::size_t n = u.grid.size() - 1;
  double acc = 0.5 * (u.u_values[0] - 1.0 + u.u_values[n] - 1.0);
  for (std::size_t i = 1; i < n; ++i) acc += u.u_values[i] - 1.0;
  return std::exp(mu * acc * u.step());
}

inline double hawkes_oakes_pgfl(double mu, const ExcitationKernel& kernel, const TestFunction& z,
                                const PgflOptions& options = {}) {
  return hawkes_oakes_pgfl(mu, solve_cluster_pgfl(kernel, z, options));
}

}  // namespace rhp
