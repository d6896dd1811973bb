#pragma once

// Renewal Hawkes realizations, built two independent ways:
//
//  * cluster superposition: immigrants from the renewal (or stationary
//    renewal) process, each seeding a satellite cluster truncated at the
//    horizon;
//  * Ogata thinning against the intensity
//        lambda(t) = mu(t - T_{I(t-)}) + sum_{t_i < t} h(t - t_i),
//    with mu the hazard of the interarrival law and T_{I(t-)} the last
//    immigrant before t.
//
// Also evaluates lambda and its compensator along a realized stream.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rhp/cluster.hpp"
#include "rhp/distributions.hpp"
#include "rhp/error.hpp"
#include "rhp/events.hpp"
#include "rhp/parallel.hpp"
#include "rhp/random.hpp"
#include "rhp/renewal.hpp"

namespace rhp {

enum class SimMethod { cluster, thinning, stationary };

inline std::string_view to_string(SimMethod m) {
  switch (m) {
    case SimMethod::cluster: return "cluster";
    case SimMethod::thinning: return "thinning";
    case SimMethod::stationary: return "stationary";
  }
  return "?";
}

inline SimMethod parse_sim_method(std::string_view s) {
  if (s == "cluster") return SimMethod::cluster;
  if (s == "thinning") return SimMethod::thinning;
  if (s == "stationary") return SimMethod::stationary;
  throw Error("unknown simulation method '" + std::string(s) + "' (expected cluster|thinning|stationary)");
}

/// Checks ordering, parentage and generation bookkeeping; throws on the
/// first violation.
inline void check_stream(const EventStream& stream) {
  const auto& ev = stream.events;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const auto& e = ev[i];
    if (i > 0 && !(e.time > ev[i - 1].time))
      throw Error("event times must be strictly increasing (tie or disorder at index " + std::to_string(i) + ")");
    if ((e.kind == EventKind::immigrant) != (e.generation == 0))
      throw Error("immigrant <=> generation 0 violated at index " + std::to_string(i));
    if (e.kind == EventKind::offspring) {
      if (!e.parent || *e.parent >= i) throw Error("offspring without an earlier parent at index " + std::to_string(i));
      if (ev[*e.parent].generation + 1 != e.generation)
        throw Error("generation(child) != generation(parent) + 1 at index " + std::to_string(i));
    } else if (e.parent) {
      throw Error("immigrant with a parent at index " + std::to_string(i));
    }
  }
}

namespace detail {

/// Sorts records by time, remaps parent indices and rejects exact ties.
inline void sort_and_reindex(std::vector<EventRecord>& events) {
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return events[a].time < events[b].time; });
  std::vector<std::size_t> where(events.size());
  for (std::size_t k = 0; k < order.size(); ++k) where[order[k]] = k;
  std::vector<EventRecord> sorted;
  sorted.reserve(events.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    EventRecord e = events[order[k]];
    if (e.parent) e.parent = where[*e.parent];
    if (k > 0 && !(e.time > sorted.back().time)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "exact tie between event times at t=" << e.time << "; continuous model produced simultaneous points";
      throw Error(msg.str());
    }
    sorted.push_back(std::move(e));
  }
  events = std::move(sorted);
}

inline EventStream superpose_clusters(EventStream immigrants, const ExcitationKernel& kernel, RandomStream& rng) {
  kernel_mass(kernel);
  std::vector<EventRecord> all;
  const double horizon = immigrants.horizon;
  for (const auto& imm : immigrants.events) {
    const ClusterTree tree = simulate_cluster(kernel, imm.time, horizon, rng);
    const std::size_t offset = all.size();
    for (const auto& node : tree.nodes) {
      EventRecord rec;
      rec.time = node.time;
      rec.kind = node.generation == 0 ? EventKind::immigrant : EventKind::offspring;
      rec.generation = node.generation;
      if (node.parent) rec.parent = offset + *node.parent;
      rec.cluster_id = imm.cluster_id;
      all.push_back(rec);
    }
  }
  sort_and_reindex(all);
  immigrants.events = std::move(all);
  return immigrants;
}

}  // namespace detail

/// Cluster representation: renewal immigrants (per `convention`), each
/// seeding a satellite cluster truncated at the horizon.
inline EventStream simulate_rhp_cluster(const RenewalModel& model, const ExcitationKernel& kernel, double horizon,
                                        const Convention& convention, RandomStream& rng) {
  kernel_mass(kernel);
  EventStream immigrants;
  switch (convention.delay) {
    case DelayKind::none: immigrants = simulate_renewal(model, horizon, convention.count_origin, rng); break;
    case DelayKind::stationary: immigrants = simulate_delayed_renewal(model, StationaryDelay{}, horizon, rng); break;
    case DelayKind::explicit_law:
      throw Error("explicit delay laws are not expressible through a Convention; use simulate_delayed_renewal");
  }
  return detail::superpose_clusters(std::move(immigrants), kernel, rng);
}

/// Cluster representation with the stationary renewal centre.
inline EventStream simulate_rhp_stationary(const RenewalModel& model, const ExcitationKernel& kernel, double horizon,
                                           RandomStream& rng) {
  return simulate_rhp_cluster(model, kernel, horizon, Convention{false, DelayKind::stationary}, rng);
}

struct ThinningOptions {
  /// Majorant lookahead; defaults to mean interarrival / 10 (1 when the
  /// mean is infinite).
  std::optional<double> window;
  /// Constant upper bound on the hazard, for families without a computable
  /// interval supremum.
  std::optional<double> hazard_envelope;
};

namespace detail {

/// Running excitation sum over the accepted history.
class Excitation {
 public:
  explicit Excitation(const ExcitationKernel& kernel) : kernel_(kernel), exp_(kernel.as_exponential()) {}

  void add(double t) {
    if (exp_) {
      exp_sum_ = value(t) + exp_->alpha * exp_->beta;
      exp_time_ = t;
    }
    times_.push_back(t);
  }

  /// sum_i h(t - t_i) over recorded t_i <= t.
  double value(double t) const {
    if (exp_) return times_.empty() ? 0.0 : exp_sum_ * std::exp(-exp_->beta * (t - exp_time_));
    double s = 0.0;
    for (double ti : times_) s += kernel_.value(t - ti);
    return s;
  }

  /// Supremum of the sum over [a, b], assuming no new points in between.
  double sup_on(double a, double b) const {
    if (exp_) return value(a);
    double s = 0.0;
    for (double ti : times_) s += kernel_.sup_on(a - ti, b - ti);
    return s;
  }

  const std::vector<double>& times() const { return times_; }

 private:
  const ExcitationKernel& kernel_;
  const ExponentialKernelLaw* exp_;
  std::vector<double> times_;
  double exp_sum_ = 0.0;
  double exp_time_ = 0.0;
};

}  // namespace detail

/// Ogata thinning against the renewal Hawkes intensity.
///
/// The majorant on [t, t + window] is the hazard supremum over the elapsed
/// interval plus the excitation supremum; it is rebuilt after each accepted
/// point and at window expiry. Each accepted point is attributed to the
/// hazard term (immigrant) or to one history point (offspring of it) with
/// probability proportional to that term's share of lambda.
inline EventStream simulate_rhp_thinning(const RenewalModel& model, const ExcitationKernel& kernel, double horizon,
                                         const Convention& convention, RandomStream& rng,
                                         const ThinningOptions& options = {}) {
  kernel_mass(kernel);
  if (!(horizon > 0.0)) throw Error("horizon must be > 0");
  if (convention.delay != DelayKind::none)
    throw Error("thinning simulator supports only undelayed immigration; use the cluster simulator");
  const double window = options.window.value_or(
      std::isfinite(model.mean_interarrival()) ? model.mean_interarrival() / 10.0 : 1.0);
  if (!(window > 0.0)) throw Error("thinning window must be > 0");

  EventStream out;
  out.horizon = horizon;
  out.convention = convention;
  detail::Excitation excitation(kernel);
  std::int64_t next_cluster = 0;
  double reference = 0.0;  // time of the last immigrant (the origin before any)

  auto accept = [&](double t, EventKind kind, std::optional<std::size_t> parent) {
    EventRecord rec;
    rec.time = t;
    rec.kind = kind;
    if (parent) {
      rec.parent = parent;
      rec.generation = out.events[*parent].generation + 1;
      rec.cluster_id = out.events[*parent].cluster_id;
    } else {
      rec.cluster_id = next_cluster++;
      reference = t;
    }
    if (!out.events.empty() && !(t > out.events.back().time)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "exact tie between event times at t=" << t << " in thinning";
      throw Error(msg.str());
    }
    out.events.push_back(rec);
    excitation.add(t);
  };

  if (convention.count_origin) accept(0.0, EventKind::immigrant, std::nullopt);

  auto hazard_bound = [&](double a, double b) {
    if (auto s = model.hazard_sup(a, b)) return *s;
    if (options.hazard_envelope) return *options.hazard_envelope;
    throw Error("unbounded hazard: supply envelope (no interval supremum for the '" +
                std::string(model.family_name()) + "' family at elapsed time " + std::to_string(a) + ")");
  };

  double t = 0.0;
  while (t < horizon) {
    const double end = std::min(t + window, horizon);
    const double bound = hazard_bound(t - reference, end - reference) + excitation.sup_on(t, end);
    if (!(bound > 0.0)) {
      t = end;
      continue;
    }
    const double candidate = t + rng.exponential(bound);
    if (candidate > end) {
      t = end;
      continue;
    }
    t = candidate;
    const double hazard_part = model.hazard(t - reference);
    const double lambda = hazard_part + excitation.value(t);
    if (lambda > bound * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "intensity " << lambda << " exceeded its majorant " << bound << " at t=" << t
          << (options.hazard_envelope ? " (hazard envelope too small)" : "");
      throw Error(msg.str());
    }
    const double u = rng.uniform() * bound;
    if (u > lambda) continue;
    if (u <= hazard_part) {
      accept(t, EventKind::immigrant, std::nullopt);
      continue;
    }
    // Locate the history point whose kernel term covers u.
    double acc = hazard_part;
    const auto& hist = excitation.times();
    std::size_t parent = hist.size() - 1;
    for (std::size_t i = 0; i < hist.size(); ++i) {
      acc += kernel.value(t - hist[i]);
      if (u <= acc) {
        parent = i;
        break;
      }
    }
    accept(t, EventKind::offspring, parent);
  }
  return out;
}

namespace detail {

inline std::size_t first_at_or_after(const EventStream& stream, double t) {
  auto it = std::lower_bound(stream.events.begin(), stream.events.end(), t,
                             [](const EventRecord& e, double x) { return e.time < x; });
  return static_cast<std::size_t>(it - stream.events.begin());
}

}  // namespace detail

/// lambda(t) = mu(t - T_{I(t-)}) + sum_{t_i < t} h(t - t_i).
///
/// Before the first immigrant the hazard is measured from the origin for an
/// undelayed stream without an origin event, and is the equilibrium hazard
/// for a stationary stream. A stream that counts the origin but has no
/// immigrant before t has no reference, which is an error unless the hazard
/// is constant.
inline double intensity_path(const EventStream& stream, const RenewalModel& model, const ExcitationKernel& kernel,
                             double t) {
  if (t > stream.horizon * (1.0 + 1e-12)) throw Error("intensity requested beyond the stream horizon");
  const std::size_t end = detail::first_at_or_after(stream, t);
  double excitation = 0.0;
  std::optional<double> last_immigrant;
  for (std::size_t i = 0; i < end; ++i) {
    const auto& e = stream.events[i];
    excitation += kernel.value(t - e.time);
    if (e.kind == EventKind::immigrant) last_immigrant = e.time;
  }
  double hazard_part = 0.0;
  if (model.is_exponential()) {
    hazard_part = model.hazard(0.0);
  } else if (last_immigrant) {
    hazard_part = model.hazard(t - *last_immigrant);
  } else {
    switch (stream.convention.delay) {
      case DelayKind::stationary: hazard_part = model.equilibrium_hazard(t); break;
      case DelayKind::explicit_law: throw Error("no reference immigrant: explicit delay law is not evaluable");
      case DelayKind::none:
        if (stream.convention.count_origin)
          throw Error("no reference immigrant before t=" + std::to_string(t) + " and the hazard needs one");
        hazard_part = model.hazard(t);
        break;
    }
  }
  return hazard_part + excitation;
}

/// Lambda(t) = integral_0^t lambda(s) ds, exactly: the hazard part is a sum
/// of cumulative hazards -log(1 - F) between consecutive immigrants and the
/// kernel part is sum_{t_i < t} H(t - t_i) with H the integrated kernel.
inline double compensator(const EventStream& stream, const RenewalModel& model, const ExcitationKernel& kernel,
                          double t) {
  if (t > stream.horizon * (1.0 + 1e-12)) throw Error("compensator requested beyond the stream horizon");
  if (t <= 0.0) return 0.0;
  const std::size_t end = detail::first_at_or_after(stream, t);
  double kernel_part = 0.0;
  for (std::size_t i = 0; i < end; ++i) kernel_part += kernel.cumulative(t - stream.events[i].time);

  if (model.is_exponential()) return model.hazard(0.0) * t + kernel_part;
  if (stream.convention.delay == DelayKind::explicit_law)
    throw Error("compensator: explicit delay law is not evaluable");

  double hazard_part = 0.0;
  auto segment = [&](double from, double to, bool delayed) {
    const double len = to - from;
    try {
      hazard_part += delayed ? model.equilibrium_cumulative_hazard(len) : model.cumulative_hazard(len);
    } catch (const Error& err) {
      std::ostringstream msg;
      msg << "compensator failed on hazard segment [" << from << ", " << to << "] (elapsed " << len
          << "): " << err.what();
      throw Error(msg.str());
    }
  };
  double reference = 0.0;
  bool delayed = stream.convention.delay == DelayKind::stationary;
  for (std::size_t i = 0; i < end; ++i) {
    const auto& e = stream.events[i];
    if (e.kind != EventKind::immigrant) continue;
    if (e.time > reference) segment(reference, e.time, delayed);
    delayed = false;
    reference = e.time;
  }
  segment(reference, t, delayed);
  return hazard_part + kernel_part;
}

/// Lambda at every event time of the stream, in order.
inline std::vector<double> compensator_at_events(const EventStream& stream, const RenewalModel& model,
                                                 const ExcitationKernel& kernel) {
  std::vector<double> out;
  out.reserve(stream.events.size());
  for (const auto& e : stream.events) out.push_back(compensator(stream, model, kernel, e.time));
  return out;
}

/// One realization by the chosen method.
inline EventStream simulate_rhp(SimMethod method, const RenewalModel& model, const ExcitationKernel& kernel,
                                double horizon, const Convention& convention, RandomStream& rng,
                                const ThinningOptions& options = {}) {
  switch (method) {
    case SimMethod::cluster: return simulate_rhp_cluster(model, kernel, horizon, convention, rng);
    case SimMethod::thinning: return simulate_rhp_thinning(model, kernel, horizon, convention, rng, options);
    case SimMethod::stationary: return simulate_rhp_stationary(model, kernel, horizon, rng);
  }
  throw Error("unknown simulation method");
}

/// `reps` independent realizations; replicate i uses substream (seed, i) and
/// has its `replicate` field set to i.
inline std::vector<EventStream> simulate_replicates(SimMethod method, const RenewalModel& model,
                                                    const ExcitationKernel& kernel, double horizon,
                                                    const Convention& convention, std::size_t reps,
                                                    std::uint64_t seed, const ThinningOptions& options = {}) {
  std::vector<EventStream> out(reps);
  parallel_for(reps, [&](std::size_t i) {
    RandomStream rng = RandomStream::substream(seed, i);
    out[i] = simulate_rhp(method, model, kernel, horizon, convention, rng, options);
    for (auto& e : out[i].events) e.replicate = static_cast<std::int64_t>(i);
  });
  return out;
}

}  // namespace rhp
