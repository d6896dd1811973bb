#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rhp/cli.hpp"
#include "rhp/config.hpp"
#include "rhp/io.hpp"

using namespace rhp;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(RHP_SOURCE_DIR) + "/configs/";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rhp_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "rhp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) { return read_text_file(path); }

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(Config, MinimalDefaults) {
  const auto cfg = parse_config(slurp(kConfigs + "minimal.json"));
  EXPECT_EQ(cfg.sim.seed, 0u);
  EXPECT_TRUE(cfg.sim.count_origin);
  EXPECT_EQ(cfg.sim.reps, 1u);
  EXPECT_DOUBLE_EQ(cfg.sim.horizon, 100.0);
  EXPECT_EQ(cfg.numeric.k_max, 3);
  EXPECT_DOUBLE_EQ(cfg.validate.level, 0.01);
  EXPECT_EQ(cfg.model.family, "gamma");
}

TEST(Config, SupercriticalRejected) {
  try {
    (void)parse_config(slurp(kConfigs + "supercritical.json"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("subcriticality"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("kernel.alpha"), std::string::npos) << e.what();
  }
}

TEST(Config, UnknownAndMissingFields) {
  EXPECT_THROW((void)parse_config(R"({"model":{"family":"exponential","rate":1,"bogus":2},
                                       "kernel":{"family":"none"}})"),
               ConfigError);
  EXPECT_THROW((void)parse_config(R"({"kernel":{"family":"none"}})"), ConfigError);
  EXPECT_THROW((void)parse_config(R"({"model":{"family":"gamma","shape":-1,"rate":1},"kernel":{"family":"none"}})"),
               ConfigError);
  EXPECT_THROW((void)parse_config("not json"), ConfigError);
}

TEST(Config, RoundTripAndIdempotence) {
  for (const char* name : {"minimal.json", "gamma.json", "exponential.json"}) {
    const std::string text = slurp(kConfigs + name);
    const std::string once = normalize_config(text);
    EXPECT_EQ(serialize_config(parse_config(text)), once) << name;
    EXPECT_EQ(normalize_config(once), once) << name;
  }
}

TEST(Config, HashStableUnderFormatting) {
  const auto a = parse_config(R"({"model":{"family":"exponential","rate":1},"kernel":{"family":"none"}})");
  const auto b = parse_config("{\n  \"kernel\": {\"family\": \"none\"},\n  \"model\": {\"rate\": 1.0, \"family\": \"exponential\"}\n}");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  auto c = a;
  c.sim.seed = 1;
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Io, CsvAndJsonlAgree) {
  TempDir dir;
  const auto j = dir.file("e.jsonl");
  const auto c = dir.file("e.csv");
  ASSERT_EQ(run({"simulate", "--config", kConfigs + "gamma.json", "--reps", "2", "--out", j}).code, kExitOk);
  ASSERT_EQ(run({"simulate", "--config", kConfigs + "gamma.json", "--reps", "2", "--out", c}).code, kExitOk);
  std::ifstream js(j), cs(c);
  const auto a = read_events_jsonl(js);
  const auto b = read_events_csv(cs);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_FALSE(a.empty());
  std::set<std::int64_t> reps;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].time, b[i].time);
    EXPECT_EQ(a[i].kind, b[i].kind);
    EXPECT_EQ(a[i].generation, b[i].generation);
    EXPECT_EQ(a[i].parent, b[i].parent);
    EXPECT_EQ(a[i].cluster_id, b[i].cluster_id);
    EXPECT_EQ(a[i].replicate, b[i].replicate);
    reps.insert(a[i].replicate);
    if (i > 0 && a[i].replicate == a[i - 1].replicate) {
      EXPECT_GE(a[i].time, a[i - 1].time);
    }
  }
  EXPECT_EQ(reps, (std::set<std::int64_t>{0, 1}));

  const std::string text = slurp(c);
  EXPECT_EQ(text.rfind("# config_hash=", 0), 0u);
  EXPECT_NE(text.find("t,kind,gen,parent,cluster,rep\n"), std::string::npos);
  EXPECT_NE(slurp(j).find("\"header\""), std::string::npos);
}

TEST(Io, OriginEventWrittenAtZero) {
  TempDir dir;
  const auto c = dir.file("e.csv");
  ASSERT_EQ(run({"simulate", "--config", kConfigs + "gamma.json", "--reps", "1", "--out", c}).code, kExitOk);
  std::ifstream cs(c);
  const auto ev = read_events_csv(cs);
  ASSERT_FALSE(ev.empty());
  EXPECT_EQ(ev.front().time, 0.0);
  EXPECT_EQ(ev.front().kind, EventKind::immigrant);
}

TEST(Cli, EverySubcommandIsDeterministic) {
  TempDir dir;
  const std::string cfg = kConfigs + "gamma.json";
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--config", cfg, "--reps", "3", "--intensity-out", "@i"},
      {"simulate", "--config", cfg, "--reps", "3", "--method", "thinning"},
      {"cluster-stats", "--config", cfg, "--reps", "2000"},
      {"renewal-table", "--config", cfg, "--step", "0.01", "--horizon", "2"},
      {"pgfl", "--config", cfg, "--z", "step:0.8:0:2", "--mode", "solver"},
      {"pgfl", "--config", cfg, "--z", "step:0.8:0:2", "--mode", "mc", "--reps", "500"},
      {"pgfl", "--config", cfg, "--z", "step:0.8:0:2", "--mode", "stationary"},
      {"pgfl", "--config", cfg, "--z", "step:0.8:0:2", "--mode", "renewal"},
      {"validate", "--config", cfg, "--suite", "existence"},
      {"validate", "--config", cfg, "--suite", "rescaling", "--reps", "20", "--plot-out", "@p"},
  };
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string outputs[2];
    for (int pass = 0; pass < 2; ++pass) {
      auto args = commands[c];
      const std::string tag = std::to_string(c) + "_" + std::to_string(pass);
      std::string extra;
      for (auto& a : args)
        if (a[0] == '@') a = extra = dir.file(tag + a.substr(1));
      args.push_back("--out");
      args.push_back(dir.file(tag + (args[0] == "simulate" ? ".jsonl" : ".out")));
      const auto r = run(args);
      ASSERT_EQ(r.code, kExitOk) << args[0] << ": " << r.err;
      outputs[pass] = slurp(args.back()) + (extra.empty() ? "" : slurp(extra));
    }
    EXPECT_EQ(outputs[0], outputs[1]) << "command " << c;
    EXPECT_FALSE(outputs[0].empty());
  }
}

TEST(Cli, OutputsCarryProvenance) {
  TempDir dir;
  const std::string cfg = kConfigs + "gamma.json";
  const std::string hash = config_hash(parse_config(slurp(cfg)));
  const auto out = dir.file("v.json");
  ASSERT_EQ(run({"validate", "--config", cfg, "--suite", "existence", "--out", out}).code, kExitOk);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["config_hash"], hash);
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["test"], "existence");
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const auto out = dir.file("o.json");
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"simulate", "--config", kConfigs + "gamma.json"}).code, kExitUsage);
  EXPECT_EQ(run({"simulate", "--config", kConfigs + "gamma.json", "--method", "magic", "--out", out}).code,
            kExitUsage);
  const auto bad = run({"simulate", "--config", kConfigs + "supercritical.json", "--out", out});
  EXPECT_EQ(bad.code, kExitFailure);
  EXPECT_NE(bad.err.find("subcriticality"), std::string::npos) << bad.err;

  // A passing diagnostic exits 0, a failing one exits 1.
  const auto tab = dir.file("tabulated_kernel.json");
  write(tab, R"({"model":{"family":"gamma","shape":2,"rate":1},"kernel":{"family":"tabulated",
                  "grid":[0,1],"values":[0.5,0.5]}})");
  EXPECT_EQ(run({"validate", "--config", tab, "--suite", "existence", "--out", out}).code, kExitOk);
  const auto heavy = dir.file("heavy.json");
  write(heavy, R"({"model":{"family":"tabulated","grid":[0,1],"density":[1,1],"tail_mass":0.3,"tail_index":0.7},
                   "kernel":{"family":"exponential","alpha":0.5,"beta":1}})");
  EXPECT_EQ(run({"validate", "--config", heavy, "--suite", "existence", "--out", out}).code, kExitFailure);
}

TEST(Cli, IoErrorsNameThePath) {
  const std::string missing = "/nonexistent_dir_rhp/config.json";
  const auto r = run({"simulate", "--config", missing, "--out", "/tmp/x.jsonl"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;

  const std::string unwritable = "/nonexistent_dir_rhp/out.jsonl";
  const auto w = run({"simulate", "--config", kConfigs + "gamma.json", "--reps", "1", "--out", unwritable});
  EXPECT_EQ(w.code, kExitFailure);
  EXPECT_NE(w.err.find(unwritable), std::string::npos) << w.err;
}
