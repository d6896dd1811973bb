#pragma once

// Ordinary, delayed and stationary renewal processes, and the renewal
// function Phi(t) = E[N_R(t)] with its density phi.

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "rhp/distributions.hpp"
#include "rhp/error.hpp"
#include "rhp/events.hpp"
#include "rhp/random.hpp"

namespace rhp {

/// First epoch drawn from the equilibrium density m (1 - F).
struct StationaryDelay {};
/// First epoch fixed at `at` (a point mass).
struct DegenerateDelay {
  double at = 0.0;
};
using DelaySpec = std::variant<StationaryDelay, DegenerateDelay, RenewalModel>;

namespace detail {

inline void append_epochs(EventStream& out, const RenewalModel& model, double first, double horizon,
                          RandomStream& rng) {
  std::int64_t id = static_cast<std::int64_t>(out.events.size());
  double t = first;
  while (t <= horizon) {
    out.events.push_back(EventRecord{t, EventKind::immigrant, 0, std::nullopt, id++, 0});
    const double next = t + model.sample(rng);
    if (!(next > t)) throw Error("renewal epochs must be strictly increasing (zero interarrival drawn)");
    t = next;
  }
}

}  // namespace detail

/// Epochs S_0 = 0 (iff count_origin), S_1, S_2, ... <= horizon.
inline EventStream simulate_renewal(const RenewalModel& model, double horizon, bool count_origin,
                                    RandomStream& rng) {
  if (!(horizon > 0.0)) throw Error("horizon must be > 0");
  EventStream out;
  out.horizon = horizon;
  out.convention = Convention{count_origin, DelayKind::none};
  if (count_origin) {
    detail::append_epochs(out, model, 0.0, horizon, rng);
  } else {
    detail::append_epochs(out, model, model.sample(rng), horizon, rng);
  }
  return out;
}

/// Delayed renewal process: first epoch from the delay law, later gaps from
/// the model. The origin is not an event unless the delay puts it there.
inline EventStream simulate_delayed_renewal(const RenewalModel& model, const DelaySpec& delay, double horizon,
                                            RandomStream& rng) {
  if (!(horizon > 0.0)) throw Error("horizon must be > 0");
  EventStream out;
  out.horizon = horizon;
  double first = 0.0;
  if (std::holds_alternative<StationaryDelay>(delay)) {
    first = model.sample_equilibrium(rng);
    out.convention = Convention{false, DelayKind::stationary};
  } else if (const auto* d = std::get_if<DegenerateDelay>(&delay)) {
    if (!(d->at >= 0.0)) throw Error("degenerate delay must sit at a nonnegative time");
    first = d->at;
    out.convention = Convention{d->at == 0.0, d->at == 0.0 ? DelayKind::none : DelayKind::explicit_law};
  } else {
    first = std::get<RenewalModel>(delay).sample(rng);
    out.convention = Convention{false, DelayKind::explicit_law};
  }
  detail::append_epochs(out, model, first, horizon, rng);
  return out;
}

/// Phi and phi on the uniform grid t_i = i * step, i = 0..n.
struct RenewalTable {
  double step = 0.0;
  std::vector<double> grid;
  std::vector<double> phi_fn;
  std::vector<double> phi_density;

  double horizon() const { return grid.empty() ? 0.0 : grid.back(); }

  double phi_fn_at(double t) const { return interpolate(phi_fn, t); }
  double phi_density_at(double t) const { return interpolate(phi_density, t); }

 private:
  double interpolate(const std::vector<double>& v, double t) const {
    if (t < 0.0) return 0.0;
    const double x = t / step;
    auto i = static_cast<std::size_t>(x);
    if (i >= v.size() - 1) {
      if (t <= horizon() * (1.0 + 1e-12)) return v.back();
      throw Error("renewal table queried beyond its horizon (t=" + std::to_string(t) + ")");
    }
    const double w = x - static_cast<double>(i);
    return v[i] + w * (v[i + 1] - v[i]);
  }
};

/// Solves Phi = 1 + F * Phi and phi = f + F * phi on a uniform grid.
///
/// Each Stieltjes convolution integral over a cell (t_{j-1}, t_j] is taken
/// as the cell's F-mass times the average of the unknown at the two cell
/// ends (trapezoidal Stieltjes rule, second order). The j = 1 cell involves
/// the current unknown, which is solved for in closed form, so the scheme
/// stays explicit and all weights stay positive.
inline RenewalTable renewal_table(const RenewalModel& model, double horizon, double step) {
  if (!(step > 0.0) || !(horizon > 0.0)) throw Error("renewal table needs step > 0 and horizon > 0");
  if (horizon / step > 1e7) throw Error("renewal table grid too large (horizon/step > 1e7)");
  if (!model.has_density()) throw Error("renewal table requires a model with a density (tabulated law has gaps)");
  const auto n = static_cast<std::size_t>(std::llround(horizon / step));
  if (n == 0) throw Error("renewal table step exceeds horizon");

  RenewalTable table;
  table.step = step;
  table.grid.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) table.grid[i] = static_cast<double>(i) * step;

  std::vector<double> mass(n + 1, 0.0);  // mass[j] = F(t_j) - F(t_{j-1})
  std::vector<double> dens(n + 1, 0.0);
  double prev_survival = 1.0;
  for (std::size_t j = 0; j <= n; ++j) {
    dens[j] = model.density(table.grid[j]);
    if (j > 0) {
      const double s = model.survival(table.grid[j]);
      mass[j] = prev_survival - s;
      prev_survival = s;
    }
  }
  if (!std::isfinite(dens[0])) throw Error("renewal density is singular at the origin; renewal table unsupported");

  auto solve = [&](auto source, std::vector<double>& out) {
    out.assign(n + 1, 0.0);
    out[0] = source(0);
    const double diag = 1.0 - 0.5 * mass[1];
    for (std::size_t i = 1; i <= n; ++i) {
      double acc = source(i) + 0.5 * mass[1] * out[i - 1];
      for (std::size_t j = 2; j <= i; ++j) acc += 0.5 * mass[j] * (out[i - j] + out[i - j + 1]);
      out[i] = acc / diag;
    }
  };
  solve([](std::size_t) { return 1.0; }, table.phi_fn);
  solve([&](std::size_t i) { return dens[i]; }, table.phi_density);
  return table;
}

}  // namespace rhp
