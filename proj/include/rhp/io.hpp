#pragma once

// Event-stream, report and plot-data files. Every file carries the config
// hash and master seed: JSON files as fields, JSONL as a leading header
// line, CSV as leading '#' comment lines.

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "rhp/error.hpp"
#include "rhp/events.hpp"
#include "rhp/validate.hpp"

namespace rhp {

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string command;
};

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view to_string(EventKind k) { return k == EventKind::immigrant ? "immigrant" : "offspring"; }

inline EventKind parse_event_kind(std::string_view s) {
  if (s == "immigrant") return EventKind::immigrant;
  if (s == "offspring") return EventKind::offspring;
  throw Error("unknown event kind '" + std::string(s) + "'");
}

/// Records of all streams ordered by (rep, t).
inline std::vector<EventRecord> ordered_records(const std::vector<EventStream>& streams) {
  std::vector<EventRecord> out;
  for (const auto& s : streams) out.insert(out.end(), s.events.begin(), s.events.end());
  std::stable_sort(out.begin(), out.end(), [](const EventRecord& a, const EventRecord& b) {
    return a.replicate != b.replicate ? a.replicate < b.replicate : a.time < b.time;
  });
  return out;
}

inline void write_events_jsonl(std::ostream& os, const std::vector<EventStream>& streams, const Provenance& p,
                               const nlohmann::ordered_json& extra = {}) {
  nlohmann::ordered_json header{{"config_hash", p.config_hash}, {"seed", p.seed}, {"reps", streams.size()}};
  if (extra.is_object())
    for (const auto& [k, v] : extra.items()) header[k] = v;
  os << nlohmann::ordered_json{{"header", header}}.dump() << '\n';
  for (const auto& e : ordered_records(streams)) {
    nlohmann::ordered_json rec{{"t", e.time},
                               {"kind", std::string(to_string(e.kind))},
                               {"gen", e.generation},
                               {"parent", e.parent ? nlohmann::ordered_json(*e.parent) : nlohmann::ordered_json(nullptr)},
                               {"cluster", e.cluster_id},
                               {"rep", e.replicate}};
    os << rec.dump() << '\n';
  }
}

inline void write_events_csv(std::ostream& os, const std::vector<EventStream>& streams, const Provenance& p) {
  os << "# config_hash=" << p.config_hash << '\n' << "# seed=" << p.seed << '\n';
  os << "t,kind,gen,parent,cluster,rep\n";
  for (const auto& e : ordered_records(streams)) {
    os << format_double(e.time) << ',' << to_string(e.kind) << ',' << e.generation << ',';
    if (e.parent) os << *e.parent;
    os << ',' << e.cluster_id << ',' << e.replicate << '\n';
  }
}

inline std::vector<EventRecord> read_events_jsonl(std::istream& is) {
  std::vector<EventRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("header")) continue;
      EventRecord e;
      e.time = j.at("t").get<double>();
      e.kind = parse_event_kind(j.at("kind").get<std::string>());
      e.generation = j.at("gen").get<int>();
      if (!j.at("parent").is_null()) e.parent = j.at("parent").get<std::size_t>();
      e.cluster_id = j.at("cluster").get<std::int64_t>();
      e.replicate = j.at("rep").get<std::int64_t>();
      out.push_back(e);
    } catch (const nlohmann::json::exception& ex) {
      throw Error("events JSONL line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

inline std::vector<EventRecord> read_events_csv(std::istream& is) {
  std::vector<EventRecord> out;
  std::string line;
  bool header_seen = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "t,kind,gen,parent,cluster,rep") throw Error("events CSV: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (cols.size() == 5 && !line.empty() && line.back() == ',') cols.emplace_back();
    if (cols.size() != 6) throw Error("events CSV line " + std::to_string(lineno) + ": expected 6 columns");
    try {
      EventRecord e;
      e.time = std::stod(cols[0]);
      e.kind = parse_event_kind(cols[1]);
      e.generation = std::stoi(cols[2]);
      if (!cols[3].empty()) e.parent = static_cast<std::size_t>(std::stoull(cols[3]));
      e.cluster_id = std::stoll(cols[4]);
      e.replicate = std::stoll(cols[5]);
      out.push_back(e);
    } catch (const std::logic_error&) {
      throw Error("events CSV line " + std::to_string(lineno) + ": bad value");
    }
  }
  return out;
}

inline nlohmann::ordered_json report_json(const DiagnosticsReport& r, const Provenance& p) {
  nlohmann::ordered_json j{{"test", r.test},
                           {"statistic", r.statistic},
                           {"p_value", r.p_value},
                           {"pass", r.pass},
                           {"level", r.level},
                           {"sample_sizes", r.sample_sizes},
                           {"message", r.message},
                           {"config_hash", p.config_hash},
                           {"seed", p.seed}};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& d : r.detail)
    rows.push_back({{"label", d.label},
                    {"statistic", d.statistic},
                    {"p_value", d.p_value},
                    {"threshold", d.threshold},
                    {"pass", d.pass},
                    {"note", d.note}});
  j["detail"] = rows;
  return j;
}

/// Opens `path` for writing, failing with the path in the message.
inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing: " + std::generic_category().message(errno));
  return os;
}

inline void finish_output(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw Error("write to '" + path + "' failed");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "' for reading: " + std::generic_category().message(errno));
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// CSV of (t, lambda(t), Lambda(t)) on `points` equally spaced times.
inline void write_intensity_csv(std::ostream& os, const EventStream& stream, const RenewalModel& model,
                                const ExcitationKernel& kernel, std::size_t points, const Provenance& p) {
  os << "# config_hash=" << p.config_hash << '\n' << "# seed=" << p.seed << '\n' << "t,intensity,compensator\n";
  for (std::size_t i = 1; i <= points; ++i) {
    const double t = stream.horizon * static_cast<double>(i) / static_cast<double>(points);
    double lam = 0.0;
    try {
      lam = intensity_path(stream, model, kernel, t);
    } catch (const Error&) {
      lam = std::numeric_limits<double>::quiet_NaN();
    }
    os << format_double(t) << ',' << format_double(lam) << ','
       << format_double(compensator(stream, model, kernel, t)) << '\n';
  }
}

/// QQ points of sorted rescaled gaps against Exp(1) quantiles.
inline void write_qq_csv(std::ostream& os, std::vector<double> gaps, const Provenance& p) {
  std::sort(gaps.begin(), gaps.end());
  os << "# config_hash=" << p.config_hash << '\n' << "# seed=" << p.seed << '\n' << "theoretical,empirical\n";
  const double n = static_cast<double>(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double q = -std::log1p(-(static_cast<double>(i) + 0.5) / n);
    os << format_double(q) << ',' << format_double(gaps[i]) << '\n';
  }
}

/// CSV of the per-row statistics of a report (KS curves over windows/shifts).
inline void write_detail_csv(std::ostream& os, const DiagnosticsReport& r, const Provenance& p) {
  os << "# config_hash=" << p.config_hash << '\n' << "# seed=" << p.seed << '\n'
     << "label,statistic,p_value,threshold,pass\n";
  for (const auto& d : r.detail)
    os << '"' << d.label << "\"," << format_double(d.statistic) << ',' << format_double(d.p_value) << ','
       << format_double(d.threshold) << ',' << (d.pass ? "true" : "false") << '\n';
}

}  // namespace rhp
