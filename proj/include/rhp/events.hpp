#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace rhp {

enum class EventKind { immigrant, offspring };

/// Law of the first immigrant epoch.
enum class DelayKind {
  none,        ///< ordinary renewal process started at 0
  stationary,  ///< equilibrium delay with density m (1 - F)
  explicit_law,  ///< caller-supplied delay law; not evaluable by intensity code
};

/// Shared origin convention; every simulator and evaluator reads the same one.
struct Convention {
  /// Whether S_0 = 0 is an event (an immigrant at the origin). Ignored for
  /// delayed processes, whose first epoch is drawn from the delay law.
  bool count_origin = true;
  DelayKind delay = DelayKind::none;

  bool origin_event() const noexcept { return count_origin && delay == DelayKind::none; }
  friend bool operator==(const Convention&, const Convention&) = default;
};

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::immigrant;
  int generation = 0;
  /// Index of the parent within the same stream; empty for immigrants.
  std::optional<std::size_t> parent;
  std::int64_t cluster_id = 0;
  std::int64_t replicate = 0;
};

/// One realization on [0, horizon], sorted by time.
struct EventStream {
  std::vector<EventRecord> events;
  double horizon = 0.0;
  Convention convention;

  std::size_t size() const noexcept { return events.size(); }

  std::size_t count_in(double a, double b) const {
    std::size_t n = 0;
    for (const auto& e : events)
      if (e.time > a && e.time <= b) ++n;
    return n;
  }

  std::vector<double> times() const {
    std::vector<double> t;
    t.reserve(events.size());
    for (const auto& e : events) t.push_back(e.time);
    return t;
  }

  /// Number of events per generation; index 0 counts the immigrants.
  std::vector<std::size_t> generation_counts() const {
    std::vector<std::size_t> counts;
    for (const auto& e : events) {
      const auto g = static_cast<std::size_t>(e.generation);
      if (counts.size() <= g) counts.resize(g + 1, 0);
      ++counts[g];
    }
    return counts;
  }
};

}  // namespace rhp
