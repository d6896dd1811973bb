#pragma once

// Batch front end. Exit status: 0 success, 1 validation or configuration
// failure (and runtime errors), 2 usage error.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rhp/cluster.hpp"
#include "rhp/config.hpp"
#include "rhp/error.hpp"
#include "rhp/io.hpp"
#include "rhp/pgfl.hpp"
#include "rhp/renewal.hpp"
#include "rhp/simulate.hpp"
#include "rhp/validate.hpp"

namespace rhp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace cli_detail {

using nlohmann::ordered_json;

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct Loaded {
  RunConfig config;
  RenewalModel model;
  ExcitationKernel kernel;
  std::string hash;
};

inline Loaded load(const std::string& path) {
  RunConfig cfg = parse_config(read_text_file(path));
  return Loaded{cfg, cfg.model.build(), cfg.kernel.build(), config_hash(cfg)};
}

inline void write_json(const std::string& path, const ordered_json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
  finish_output(os, path);
}

inline ordered_json mc_json(const McEstimate& e) {
  return ordered_json{{"estimate", e.estimate}, {"standard_error", e.standard_error}, {"reps", e.reps}};
}

struct SimulateArgs {
  std::string config, out, intensity_out;
  std::optional<std::string> method;
  std::optional<std::uint64_t> reps, seed;
  std::size_t points = 1000;
};

inline int simulate(const SimulateArgs& a) {
  const Loaded l = load(a.config);
  const SimMethod method = a.method ? parse_sim_method(*a.method) : l.config.sim.method;
  const std::uint64_t reps = a.reps.value_or(l.config.sim.reps);
  const std::uint64_t seed = a.seed.value_or(l.config.sim.seed);
  const auto streams = simulate_replicates(method, l.model, l.kernel, l.config.sim.horizon, l.config.sim.convention(),
                                           reps, seed, l.config.sim.thinning());
  const Provenance p{l.hash, seed, "simulate"};
  auto os = open_output(a.out);
  if (ends_with(a.out, ".csv")) {
    write_events_csv(os, streams, p);
  } else {
    write_events_jsonl(os, streams, p,
                       ordered_json{{"method", std::string(to_string(method))}, {"horizon", l.config.sim.horizon}});
  }
  finish_output(os, a.out);
  if (!a.intensity_out.empty()) {
    auto is = open_output(a.intensity_out);
    write_intensity_csv(is, streams.front(), l.model, l.kernel, a.points, p);
    finish_output(is, a.intensity_out);
  }
  return kExitOk;
}

struct ClusterStatsArgs {
  std::string config, out;
  std::optional<std::uint64_t> reps, seed;
  int generations = 4;
};

inline int cluster_stats(const ClusterStatsArgs& a) {
  const Loaded l = load(a.config);
  const std::uint64_t clusters = a.reps.value_or(l.config.numeric.mc_reps);
  const std::uint64_t seed = a.seed.value_or(l.config.sim.seed);
  const double alpha = kernel_mass(l.kernel);
  if (!(alpha > 0.0)) throw Error("cluster-stats needs a kernel with alpha > 0");
  const auto sizes = cluster_size_test(l.kernel, clusters, seed, l.config.validate.level);
  const auto gens = generation_test(l.kernel, clusters, a.generations, seed, l.config.validate.level);
  const Provenance p{l.hash, seed, "cluster-stats"};
  ordered_json pmf = ordered_json::array();
  const auto borel = cluster_size_pmf(alpha, 20);
  for (std::size_t n = 1; n <= borel.size(); ++n) pmf.push_back({{"n", n}, {"p", borel[n - 1]}});
  ordered_json j{{"config_hash", l.hash},
                 {"seed", seed},
                 {"alpha", alpha},
                 {"clusters", clusters},
                 {"mean_cluster_size", mean_cluster_size(alpha)},
                 {"size_test", report_json(sizes, p)},
                 {"generation_test", report_json(gens, p)},
                 {"borel_pmf", pmf}};
  write_json(a.out, j);
  return kExitOk;
}

struct RenewalTableArgs {
  std::string config, out;
  std::optional<double> step, horizon;
};

inline int renewal_table_cmd(const RenewalTableArgs& a) {
  const Loaded l = load(a.config);
  const double step = a.step.value_or(l.config.numeric.renewal_step);
  const double horizon = a.horizon.value_or(l.config.numeric.renewal_horizon);
  const RenewalTable t = renewal_table(l.model, horizon, step);
  auto os = open_output(a.out);
  os << "# config_hash=" << l.hash << '\n' << "# seed=" << l.config.sim.seed << '\n' << "t,phi_fn,phi_density\n";
  for (std::size_t i = 0; i < t.grid.size(); ++i)
    os << format_double(t.grid[i]) << ',' << format_double(t.phi_fn[i]) << ',' << format_double(t.phi_density[i])
       << '\n';
  finish_output(os, a.out);
  return kExitOk;
}

struct PgflArgs {
  std::string config, out, z, mode = "solver";
  std::optional<std::uint64_t> reps, seed;
};

inline int pgfl(const PgflArgs& a) {
  const Loaded l = load(a.config);
  const TestFunction z = TestFunction::parse(a.z);
  const auto& num = l.config.numeric;
  const std::uint64_t seed = a.seed.value_or(l.config.sim.seed);
  PgflOptions opts{num.pgfl_tolerance, num.pgfl_step, num.pgfl_max_iterations};
  ordered_json j{{"config_hash", l.hash}, {"seed", seed}, {"mode", a.mode}, {"z", z.describe()}};
  if (a.mode == "solver") {
    const PgflSolution u = solve_cluster_pgfl(l.kernel, z, opts);
    j["cluster_pgfl_at_0"] = u.at(0.0);
    j["iterations"] = u.iterations;
    j["residual"] = u.residual;
    j["grid_step"] = u.step();
    ordered_json curve = ordered_json::array();
    const std::size_t stride = std::max<std::size_t>(1, u.grid.size() / 100);
    for (std::size_t i = 0; i < u.grid.size(); i += stride) curve.push_back({u.grid[i], u.u_values[i]});
    j["u"] = curve;
    if (l.model.is_exponential()) j["hawkes_oakes"] = hawkes_oakes_pgfl(l.model.rate(), u);
  } else if (a.mode == "mc") {
    const std::uint64_t reps = a.reps.value_or(num.mc_reps);
    RandomStream rng = RandomStream::substream(seed, 0);
    j["cluster_at_0"] = mc_json(mc_pgfl_cluster(l.kernel, z, 0.0, reps, rng));
    j["method"] = std::string(to_string(l.config.sim.method));
    j["process"] = mc_json(
        mc_pgfl_process(l.config.sim.method, l.model, l.kernel, z, l.config.sim.convention(), reps, seed + 1));
  } else if (a.mode == "stationary") {
    if (z.unbounded_support()) throw Error("stationary mode needs a test function of bounded support");
    const RenewalTable table = renewal_table(l.model, z.support_bound(), num.renewal_step);
    const auto e = stationary_pgfl_expansion(l.model, l.kernel, z, num.k_max, table, opts, num.expansion_tolerance);
    j["partial_sums"] = e.partial_sums;
    j["value"] = e.value;
    j["last_term"] = e.last_term;
    j["converged"] = e.converged;
    if (!e.converged) j["warning"] = "last expansion term exceeds the tolerance; raise k_max";
  } else if (a.mode == "renewal") {
    if (z.unbounded_support()) throw Error("renewal mode needs a test function of bounded support");
    TruncatedPgflOptions topts{num.truncation_step, num.truncation_accuracy};
    const auto r = renewal_pgfl_truncated(l.model, z, z.support_bound(), num.truncation_n_max,
                                          l.config.sim.convention(), topts);
    j["value"] = r.value;
    j["terms"] = r.terms;
    j["tail_bound"] = r.tail_bound;
  } else {
    throw Error("unknown pgfl mode '" + a.mode + "'");
  }
  write_json(a.out, j);
  return kExitOk;
}

struct ValidateArgs {
  std::string config, out, suite, plot_out;
  std::optional<std::uint64_t> reps, seed;
};

inline int validate(const ValidateArgs& a) {
  const Loaded l = load(a.config);
  const auto& cfg = l.config;
  const std::uint64_t reps = a.reps.value_or(cfg.sim.reps);
  const std::uint64_t seed = a.seed.value_or(cfg.sim.seed);
  const Provenance p{l.hash, seed, "validate"};
  DiagnosticsReport report;
  std::vector<double> gaps;
  if (a.suite == "rescaling") {
    const auto streams = simulate_replicates(cfg.sim.method, l.model, l.kernel, cfg.sim.horizon,
                                             cfg.sim.convention(), reps, seed, cfg.sim.thinning());
    report = time_rescaling_test(streams, l.model, l.kernel, cfg.validate.level);
    if (!a.plot_out.empty())
      for (const auto& s : streams) {
        const auto g = rescaled_gaps(s, l.model, l.kernel);
        gaps.insert(gaps.end(), g.begin(), g.end());
      }
  } else if (a.suite == "cross") {
    CrossSimulatorSetup setup{l.model, l.kernel, cfg.sim.horizon, cfg.sim.convention(), cfg.sim.thinning()};
    report = cross_simulator_test(setup, SimMethod::cluster, SimMethod::thinning, reps,
                                  equal_windows(cfg.sim.horizon, cfg.validate.windows), seed, cfg.validate.level);
  } else if (a.suite == "stationarity") {
    StationarityOptions opts;
    opts.level = cfg.validate.level;
    opts.plain = cfg.sim.convention();
    report = stationarity_and_convergence(l.model, l.kernel, cfg.validate.shifts, cfg.validate.window, reps, seed,
                                          opts);
  } else if (a.suite == "existence") {
    report = existence_preconditions(l.model, l.kernel, cfg.validate.window);
  } else {
    throw Error("unknown suite '" + a.suite + "'");
  }
  write_json(a.out, report_json(report, p));
  if (!a.plot_out.empty()) {
    auto os = open_output(a.plot_out);
    if (a.suite == "rescaling") write_qq_csv(os, gaps, p);
    else write_detail_csv(os, report, p);
    finish_output(os, a.plot_out);
  }
  return report.pass ? kExitOk : kExitFailure;
}

}  // namespace cli_detail

/// Parses arguments and runs one subcommand.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Renewal Hawkes process simulation, p.g.fl. numerics and validation", "rhp"};
  app.require_subcommand(1);
  const std::vector<std::string> methods{"cluster", "thinning", "stationary"};

  cli_detail::SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "simulate replicate event streams");
  s->add_option("--config", sim.config, "config file")->required();
  s->add_option("--method", sim.method, "simulation method")->check(CLI::IsMember(methods));
  s->add_option("--reps", sim.reps, "number of replicates")->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "master seed");
  s->add_option("--out", sim.out, "events file (.jsonl or .csv)")->required();
  s->add_option("--intensity-out", sim.intensity_out, "CSV of the intensity path of replicate 0");
  s->add_option("--points", sim.points, "points on the intensity path")->check(CLI::PositiveNumber);

  cli_detail::ClusterStatsArgs cs;
  auto* c = app.add_subcommand("cluster-stats", "cluster size and generation statistics");
  c->add_option("--config", cs.config, "config file")->required();
  c->add_option("--reps", cs.reps, "number of clusters")->check(CLI::PositiveNumber);
  c->add_option("--seed", cs.seed, "master seed");
  c->add_option("--generations", cs.generations, "generations checked against alpha^n")->check(CLI::Range(1, 50));
  c->add_option("--out", cs.out, "output JSON")->required();

  cli_detail::RenewalTableArgs rt;
  auto* r = app.add_subcommand("renewal-table", "renewal function and density on a grid");
  r->add_option("--config", rt.config, "config file")->required();
  r->add_option("--step", rt.step, "grid step")->check(CLI::PositiveNumber);
  r->add_option("--horizon", rt.horizon, "table horizon")->check(CLI::PositiveNumber);
  r->add_option("--out", rt.out, "output CSV")->required();

  cli_detail::PgflArgs pg;
  auto* g = app.add_subcommand("pgfl", "probability generating functionals");
  g->add_option("--config", pg.config, "config file")->required();
  g->add_option("--z", pg.z, "test function: const:Z0 or step:Z0:A:B")->required();
  g->add_option("--mode", pg.mode, "solver, mc, stationary or renewal")
      ->check(CLI::IsMember({"solver", "mc", "stationary", "renewal"}));
  g->add_option("--reps", pg.reps, "Monte Carlo replicates")->check(CLI::Range(100, 100'000'000));
  g->add_option("--seed", pg.seed, "master seed");
  g->add_option("--out", pg.out, "output JSON")->required();

  cli_detail::ValidateArgs va;
  auto* v = app.add_subcommand("validate", "statistical validation suites");
  v->add_option("--config", va.config, "config file")->required();
  v->add_option("--suite", va.suite, "rescaling, cross, stationarity or existence")
      ->required()
      ->check(CLI::IsMember({"rescaling", "cross", "stationarity", "existence"}));
  v->add_option("--reps", va.reps, "replicates")->check(CLI::PositiveNumber);
  v->add_option("--seed", va.seed, "master seed");
  v->add_option("--out", va.out, "report JSON")->required();
  v->add_option("--plot-out", va.plot_out, "plot data CSV (QQ points or per-row statistics)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cli_detail::simulate(sim);
    if (c->parsed()) return cli_detail::cluster_stats(cs);
    if (r->parsed()) return cli_detail::renewal_table_cmd(rt);
    if (g->parsed()) return cli_detail::pgfl(pg);
    if (v->parsed()) {
      const int code = cli_detail::validate(va);
      if (code != kExitOk) err << "validation failed; see " << va.out << '\n';
      return code;
    }
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace rhp
