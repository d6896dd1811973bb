#pragma once

// Run configuration: JSON text with blocks "model", "kernel", "sim",
// "numeric" and "validate". Parsing collects every field-level problem
// before failing; serialize() emits the normalized form with all defaults
// filled in, so serialize(parse(x)) is the canonical text of x.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "rhp/distributions.hpp"
#include "rhp/error.hpp"
#include "rhp/events.hpp"
#include "rhp/simulate.hpp"

namespace rhp {

struct ModelSpec {
  std::string family = "exponential";
  double rate = 1.0;   // exponential, gamma
  double shape = 1.0;  // gamma, weibull
  double scale = 1.0;  // weibull
  double mu = 0.0;     // lognormal
  double sigma = 1.0;  // lognormal
  std::vector<double> grid, density;  // tabulated
  double tail_mass = 0.0;
  double tail_index = 0.0;

  RenewalModel build() const {
    if (family == "exponential") return RenewalModel::exponential(rate);
    if (family == "gamma") return RenewalModel::gamma(shape, rate);
    if (family == "weibull") return RenewalModel::weibull(shape, scale);
    if (family == "lognormal") return RenewalModel::lognormal(mu, sigma);
    if (family == "tabulated") return RenewalModel::tabulated(grid, density, tail_mass, tail_index);
    throw Error("unknown model family '" + family + "'");
  }
};

struct KernelSpec {
  std::string family = "exponential";
  double alpha = 0.5;
  double beta = 1.0;
  std::vector<double> grid, values;  // tabulated

  ExcitationKernel build() const {
    if (family == "exponential") return ExcitationKernel::exponential(alpha, beta);
    if (family == "tabulated") return ExcitationKernel::tabulated(grid, values);
    if (family == "none") return ExcitationKernel::zero();
    throw Error("unknown kernel family '" + family + "'");
  }
};

struct SimSpec {
  double horizon = 100.0;
  std::uint64_t reps = 1;
  std::uint64_t seed = 0;
  bool count_origin = true;
  SimMethod method = SimMethod::cluster;
  std::optional<double> hazard_envelope;
  std::optional<double> thinning_window;

  Convention convention() const { return Convention{count_origin, DelayKind::none}; }
  ThinningOptions thinning() const { return ThinningOptions{thinning_window, hazard_envelope}; }
};

struct NumericSpec {
  double renewal_step = 1e-3;
  double renewal_horizon = 10.0;
  std::optional<double> pgfl_step;  // default: support / 1000
  double pgfl_tolerance = 1e-10;
  std::uint64_t pgfl_max_iterations = 10'000;
  std::uint64_t truncation_n_max = 20;
  std::optional<double> truncation_step;  // default: T / 2000
  double truncation_accuracy = 1e-5;
  std::uint64_t k_max = 3;
  double expansion_tolerance = 1e-3;
  std::uint64_t mc_reps = 10'000;
};

struct ValidateSpec {
  double level = 0.01;
  std::uint64_t windows = 5;
  std::vector<double> shifts{25.0, 50.0, 100.0, 150.0, 200.0};
  double window = 10.0;
};

struct RunConfig {
  ModelSpec model;
  KernelSpec kernel;
  SimSpec sim;
  NumericSpec numeric;
  ValidateSpec validate;
};

namespace detail {

using nlohmann::json;

class FieldReader {
 public:
  FieldReader(const json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {}

  template <class T>
  void read(const char* key, T& out) {
    seen_.emplace_back(key);
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) return fail(key, "expected a number");
      out = v.get<double>();
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return fail(key, "expected true or false");
      out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) return fail(key, "expected a nonnegative integer");
      out = v.get<std::uint64_t>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return fail(key, "expected a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) return fail(key, "expected an array of numbers");
      out.clear();
      for (const auto& x : v) {
        if (!x.is_number()) return fail(key, "expected an array of numbers");
        out.push_back(x.get<double>());
      }
    } else if constexpr (std::is_same_v<T, std::optional<double>>) {
      if (v.is_null()) {
        out.reset();
        return;
      }
      if (!v.is_number()) return fail(key, "expected a number or null");
      out = v.get<double>();
    } else {
      static_assert(sizeof(T) == 0, "unsupported field type");
    }
  }

  void forbid_unknown() {
    for (const auto& [key, _] : obj_.items())
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) fail(key.c_str(), "unknown field");
  }

  void require(const char* key) {
    if (!obj_.contains(key)) fail(key, "missing required field");
  }

  void fail(const char* key, const std::string& msg) { errors_.push_back(path_ + "." + key + ": " + msg); }

  void check(bool ok, const char* key, const std::string& msg) {
    if (!ok) fail(key, msg);
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::vector<std::string> seen_;
};

inline const json* block(const json& root, const char* name, std::vector<std::string>& errors, bool required) {
  if (!root.contains(name)) {
    if (required) errors.push_back(std::string(name) + ": missing required block");
    return nullptr;
  }
  const json& b = root.at(name);
  if (!b.is_object()) {
    errors.push_back(std::string(name) + ": expected an object");
    return nullptr;
  }
  return &b;
}

}  // namespace detail

/// Parses and validates configuration text. Throws ConfigError listing
/// every offending field.
inline RunConfig parse_config(std::string_view text) {
  using nlohmann::json;
  std::vector<std::string> errors;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config: not valid JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"config: top level must be an object"});
  RunConfig cfg;

  for (const auto& [key, _] : root.items())
    if (key != "model" && key != "kernel" && key != "sim" && key != "numeric" && key != "validate")
      errors.push_back(key + ": unknown field");

  if (const json* b = detail::block(root, "model", errors, true)) {
    detail::FieldReader r(*b, "model", errors);
    auto& m = cfg.model;
    r.require("family");
    r.read("family", m.family);
    if (m.family == "exponential") {
      r.read("rate", m.rate);
      r.check(m.rate > 0.0, "rate", "must be > 0");
    } else if (m.family == "gamma") {
      r.read("shape", m.shape);
      r.read("rate", m.rate);
      r.check(m.shape > 0.0, "shape", "must be > 0");
      r.check(m.rate > 0.0, "rate", "must be > 0");
    } else if (m.family == "weibull") {
      r.read("shape", m.shape);
      r.read("scale", m.scale);
      r.check(m.shape > 0.0, "shape", "must be > 0");
      r.check(m.scale > 0.0, "scale", "must be > 0");
    } else if (m.family == "lognormal") {
      r.read("mu", m.mu);
      r.read("sigma", m.sigma);
      r.check(std::isfinite(m.mu), "mu", "must be finite");
      r.check(m.sigma > 0.0, "sigma", "must be > 0");
    } else if (m.family == "tabulated") {
      r.require("grid");
      r.require("density");
      r.read("grid", m.grid);
      r.read("density", m.density);
      r.read("tail_mass", m.tail_mass);
      r.read("tail_index", m.tail_index);
    } else {
      r.fail("family", "unknown family '" + m.family + "' (exponential, gamma, weibull, lognormal, tabulated)");
    }
    r.forbid_unknown();
    if (m.family == "tabulated" && errors.empty()) {
      try {
        (void)m.build();
      } catch (const Error& e) {
        errors.push_back(std::string("model: ") + e.what());
      }
    }
  }

  if (const json* b = detail::block(root, "kernel", errors, true)) {
    detail::FieldReader r(*b, "kernel", errors);
    auto& k = cfg.kernel;
    r.read("family", k.family);
    if (k.family == "exponential") {
      r.read("alpha", k.alpha);
      r.read("beta", k.beta);
      r.check(k.alpha >= 0.0, "alpha", "must be >= 0");
      r.check(!(k.alpha >= 1.0), "alpha",
              "must be < 1: the branching ratio alpha = integral of h must satisfy the subcriticality "
              "assumption (A), alpha < 1");
      r.check(k.beta > 0.0, "beta", "must be > 0");
    } else if (k.family == "tabulated") {
      r.require("grid");
      r.require("values");
      r.read("grid", k.grid);
      r.read("values", k.values);
    } else if (k.family == "none") {
    } else {
      r.fail("family", "unknown family '" + k.family + "' (exponential, tabulated, none)");
    }
    r.forbid_unknown();
    if (k.family == "tabulated") {
      try {
        (void)kernel_mass(k.build());
      } catch (const Error& e) {
        errors.push_back(std::string("kernel: ") + e.what() + " (subcriticality assumption (A))");
      }
    }
  }

  if (const json* b = detail::block(root, "sim", errors, false)) {
    detail::FieldReader r(*b, "sim", errors);
    auto& s = cfg.sim;
    std::string method(to_string(s.method));
    r.read("horizon", s.horizon);
    r.read("reps", s.reps);
    r.read("seed", s.seed);
    r.read("count_origin", s.count_origin);
    r.read("method", method);
    r.read("hazard_envelope", s.hazard_envelope);
    r.read("thinning_window", s.thinning_window);
    r.forbid_unknown();
    r.check(s.horizon > 0.0 && std::isfinite(s.horizon), "horizon", "must be finite and > 0");
    r.check(s.reps >= 1, "reps", "must be >= 1");
    r.check(!s.hazard_envelope || *s.hazard_envelope > 0.0, "hazard_envelope", "must be > 0");
    r.check(!s.thinning_window || *s.thinning_window > 0.0, "thinning_window", "must be > 0");
    try {
      s.method = parse_sim_method(method);
    } catch (const Error& e) {
      r.fail("method", e.what());
    }
  }

  if (const json* b = detail::block(root, "numeric", errors, false)) {
    detail::FieldReader r(*b, "numeric", errors);
    auto& n = cfg.numeric;
    r.read("renewal_step", n.renewal_step);
    r.read("renewal_horizon", n.renewal_horizon);
    r.read("pgfl_step", n.pgfl_step);
    r.read("pgfl_tolerance", n.pgfl_tolerance);
    r.read("pgfl_max_iterations", n.pgfl_max_iterations);
    r.read("truncation_n_max", n.truncation_n_max);
    r.read("truncation_step", n.truncation_step);
    r.read("truncation_accuracy", n.truncation_accuracy);
    r.read("k_max", n.k_max);
    r.read("expansion_tolerance", n.expansion_tolerance);
    r.read("mc_reps", n.mc_reps);
    r.forbid_unknown();
    r.check(n.renewal_step > 0.0, "renewal_step", "must be > 0");
    r.check(n.renewal_horizon > 0.0, "renewal_horizon", "must be > 0");
    r.check(!n.pgfl_step || *n.pgfl_step > 0.0, "pgfl_step", "must be > 0");
    r.check(n.pgfl_tolerance > 0.0, "pgfl_tolerance", "must be > 0");
    r.check(n.pgfl_max_iterations >= 1, "pgfl_max_iterations", "must be >= 1");
    r.check(!n.truncation_step || *n.truncation_step > 0.0, "truncation_step", "must be > 0");
    r.check(n.truncation_accuracy > 0.0, "truncation_accuracy", "must be > 0");
    r.check(n.k_max >= 1 && n.k_max <= 3, "k_max", "must lie in [1, 3]");
    r.check(n.expansion_tolerance > 0.0, "expansion_tolerance", "must be > 0");
    r.check(n.mc_reps >= 100, "mc_reps", "must be >= 100");
  }

  if (const json* b = detail::block(root, "validate", errors, false)) {
    detail::FieldReader r(*b, "validate", errors);
    auto& v = cfg.validate;
    r.read("level", v.level);
    r.read("windows", v.windows);
    r.read("shifts", v.shifts);
    r.read("window", v.window);
    r.forbid_unknown();
    r.check(v.level > 0.0 && v.level < 1.0, "level", "must lie in (0, 1)");
    r.check(v.windows >= 1, "windows", "must be >= 1");
    r.check(v.window > 0.0, "window", "must be > 0");
    bool increasing = v.shifts.size() >= 2 && v.shifts.front() >= 0.0;
    for (std::size_t i = 1; i < v.shifts.size(); ++i) increasing = increasing && v.shifts[i] > v.shifts[i - 1];
    r.check(increasing, "shifts", "need at least two increasing shifts >= 0");
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

/// Normalized JSON: fixed key order, every field present, only the fields
/// relevant to the chosen families.
inline std::string serialize_config(const RunConfig& cfg) {
  using nlohmann::ordered_json;
  ordered_json root;
  ordered_json m;
  const auto& ms = cfg.model;
  m["family"] = ms.family;
  if (ms.family == "exponential") m["rate"] = ms.rate;
  else if (ms.family == "gamma") {
    m["shape"] = ms.shape;
    m["rate"] = ms.rate;
  } else if (ms.family == "weibull") {
    m["shape"] = ms.shape;
    m["scale"] = ms.scale;
  } else if (ms.family == "lognormal") {
    m["mu"] = ms.mu;
    m["sigma"] = ms.sigma;
  } else {
    m["grid"] = ms.grid;
    m["density"] = ms.density;
    m["tail_mass"] = ms.tail_mass;
    m["tail_index"] = ms.tail_index;
  }
  root["model"] = m;

  ordered_json k;
  const auto& ks = cfg.kernel;
  k["family"] = ks.family;
  if (ks.family == "exponential") {
    k["alpha"] = ks.alpha;
    k["beta"] = ks.beta;
  } else if (ks.family == "tabulated") {
    k["grid"] = ks.grid;
    k["values"] = ks.values;
  }
  root["kernel"] = k;

  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  const auto& s = cfg.sim;
  root["sim"] = ordered_json{{"horizon", s.horizon},
                             {"reps", s.reps},
                             {"seed", s.seed},
                             {"count_origin", s.count_origin},
                             {"method", std::string(to_string(s.method))},
                             {"hazard_envelope", opt(s.hazard_envelope)},
                             {"thinning_window", opt(s.thinning_window)}};
  const auto& n = cfg.numeric;
  root["numeric"] = ordered_json{{"renewal_step", n.renewal_step},
                                 {"renewal_horizon", n.renewal_horizon},
                                 {"pgfl_step", opt(n.pgfl_step)},
                                 {"pgfl_tolerance", n.pgfl_tolerance},
                                 {"pgfl_max_iterations", n.pgfl_max_iterations},
                                 {"truncation_n_max", n.truncation_n_max},
                                 {"truncation_step", opt(n.truncation_step)},
                                 {"truncation_accuracy", n.truncation_accuracy},
                                 {"k_max", n.k_max},
                                 {"expansion_tolerance", n.expansion_tolerance},
                                 {"mc_reps", n.mc_reps}};
  const auto& v = cfg.validate;
  root["validate"] = ordered_json{
      {"level", v.level}, {"windows", v.windows}, {"shifts", v.shifts}, {"window", v.window}};
  return root.dump(2) + "\n";
}

/// Canonical text of a configuration; throws ConfigError when invalid.
inline std::string normalize_config(std::string_view text) { return serialize_config(parse_config(text)); }

/// 64-bit FNV-1a of the normalized configuration, as 16 hex digits.
inline std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rhp
