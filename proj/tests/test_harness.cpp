#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hapdec/harness/commands.hpp"

using namespace hapdec;
using namespace hapdec::harness;
namespace fs = std::filesystem;
using Catch::Approx;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "hapdec_test_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json minimal_config(int n_dyads = 1, int n_blocks = 8) {
  json dyads = json::array();
  for (int d = 0; d < n_dyads; ++d)
    dyads.push_back({{"member_a", {{"sigma_pct", 4.0}}}, {"member_b", {{"sigma_pct", 4.0 + 2.0 * d}}}});
  return {{"master_seed", 12345}, {"n_blocks", n_blocks}, {"dyads", dyads}};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HAPDEC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config parsing", "[harness]") {
  const auto cfg = config_from_json(minimal_config());
  CHECK(cfg.master_seed == 12345);
  CHECK(cfg.n_blocks == 8);
  REQUIRE(cfg.dyads.size() == 1);
  CHECK(cfg.thresholds == default_thresholds());
  CHECK(cfg.coupling.dt == 0.001);

  auto j = minimal_config();
  j.erase("master_seed");
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal_config();
  j["master_seed"] = -4;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal_config();
  j["n_blokcs"] = 8;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal_config();
  j["dyads"][0]["member_a"]["sigma"] = 3.0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal_config();
  j["dyads"][0]["member_a"]["sigma_pct"] = "four";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal_config();
  j["dyads"][0]["member_a"]["sigma_pct"] = -1.0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal_config();
  j["thresholds"] = {0.05, 1.0};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal_config();
  j["dyads"] = json::array();
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal_config();
  j["coupling"] = {{"timeout_s", 0.0}};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = minimal_config();
  j["dyads"][0]["member_b"]["yield_rule"] = "coin";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("config hash", "[harness]") {
  const auto a = config_from_json(minimal_config());
  auto j = minimal_config();
  j["output_dir"] = "/somewhere/else";
  j["dyads"][0]["member_a"]["bias_pct"] = 0.0;  // default spelled out
  const auto b = config_from_json(j);
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  j["master_seed"] = 12346;
  CHECK(config_hash(config_from_json(j)) != config_hash(a));
  // normalized form parses back to the same hash
  CHECK(config_hash(config_from_json(normalized_json(a))) == config_hash(a));
}

TEST_CASE("simulate writes 128 rows and is byte-identical", "[harness]") {
  const auto cfg = config_from_json(minimal_config());
  const auto d1 = scratch("sim1");
  const auto d2 = scratch("sim2");
  const auto s1 = cmd_simulate(cfg, {d1, 1, true});
  const auto s2 = cmd_simulate(cfg, {d2, 3, true});
  CHECK(s1.n_records == 128);
  CHECK(io::CsvTable::read((d1 / "records.csv").string()).size() == 128);
  CHECK(slurp(d1 / "records.csv") == slurp(d2 / "records.csv"));
  CHECK(slurp(d1 / "manifest.json") == slurp(d2 / "manifest.json"));
  CHECK(s1.n_trajectories == s2.n_trajectories);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(d1 / "trajectories")) {
    ++files;
    CHECK(slurp(e.path()) == slurp(d2 / "trajectories" / e.path().filename()));
  }
  CHECK(files == s1.n_trajectories);

  const auto m = load_manifest(d1 / "manifest.json");
  CHECK(m.config_hash == s1.config_hash);
  CHECK(m.master_seed == 12345);
  CHECK(m.toolkit_version == kToolkitVersion);

  SessionConfig no_dir = cfg;
  CHECK_THROWS_AS(cmd_simulate(no_dir), ConfigError);
}

TEST_CASE("fit", "[harness]") {
  const auto dir = scratch("fit");
  cmd_simulate(config_from_json(minimal_config(2, 8)), {dir, 1, false});
  const auto j = cmd_fit(dir / "records.csv", {true, std::nullopt});
  REQUIRE(fs::exists(dir / "fits.json"));
  REQUIRE(j["dyads"].size() == 2);
  for (const auto& d : j["dyads"]) {
    for (const char* k : {"member_a", "member_b", "dyad_fit", "predictions", "low_confidence"}) CHECK(d.contains(k));
    CHECK(d["per_block"].size() == 8);
    for (const char* m : {"WCS", "CF", "BF", "DSS"}) CHECK(d["predictions"].contains(m));
  }

  const auto empty = scratch("fit_empty");
  { io::CsvWriter w((empty / "records.csv").string(), io::record_header()); }
  CHECK_THROWS_AS(cmd_fit(empty / "records.csv"), std::invalid_argument);
}

TEST_CASE("fit: equal members give a slope ratio near 1", "[harness]") {
  SessionOptions o;
  o.keep_logs = false;
  const auto recs = run_session({AgentProfile{}, AgentProfile{}}, 40, CouplingConfig{}, 3, o);
  const auto f = fit_dyad_records(recs);
  CHECK(f.ratio() > 0.8);
  CHECK_FALSE(f.low_confidence);
  CHECK(f.n_trials == 640);
}

TEST_CASE("fit: WCS-exact dyad matches the predicted slope", "[harness]") {
  const PsychCurve c1(0.0, 3.0), c2(0.0, 5.0);
  Rng rng = derive_rng(21, {});
  const auto t = simulate_dyad_tables(c1, c2, canonical_levels(), 20000, rng);
  const double s = slope(fit_curve(t.group).curve);
  CHECK(s == Approx((slope(c1) + slope(c2)) / std::numbers::sqrt2).epsilon(0.05));
}

TEST_CASE("fit: few disagreements flag the dyad", "[harness]") {
  const auto recs = run_session({AgentProfile{}, AgentProfile{}}, 1, CouplingConfig{}, 9);
  const auto f = fit_dyad_records(recs);
  CHECK(f.n_group_completed < kMinDisagreementTrials);
  CHECK(f.low_confidence);
}

TEST_CASE("analyze", "[harness]") {
  const auto dir = scratch("analyze");
  cmd_simulate(config_from_json(minimal_config(2, 6)), {dir, 1, true});
  const auto s = cmd_analyze(dir / "records.csv");
  for (const char* k : {"peak_force", "mechanical_work", "decision_time", "initiation_time", "velocity_ratio"})
    CHECK(s.contains(k));
  CHECK(s["peak_force"]["leader_vs_follower"]["pooled"].contains("t"));

  const auto p = io::CsvTable::read((dir / "predictors.csv").string());
  int crossings = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.at(i, "predictor") == "first_crossing") {
      ++crossings;
      CHECK_FALSE(p.at(i, "reference_human_value").empty());
    }
  CHECK(crossings == 7);
  CHECK(p.has("reference_human_value"));
  CHECK(io::CsvTable::read((dir / "times.csv").string()).size() == 4);
  CHECK(io::CsvTable::read((dir / "leadership.csv").string()).size() == s["n_group_completed"].get<std::size_t>());

  const auto first = slurp(dir / "stats.json");
  const auto lead = slurp(dir / "leadership.csv");
  cmd_analyze(dir / "records.csv");
  CHECK(slurp(dir / "stats.json") == first);
  CHECK(slurp(dir / "leadership.csv") == lead);

  const auto custom = cmd_analyze(dir / "records.csv", {std::vector<double>{0.1, 0.2}, dir / "custom"});
  CHECK(io::CsvTable::read((dir / "custom" / "predictors.csv").string()).size() == 5 + 2);
  CHECK_THROWS_AS(cmd_analyze(dir / "records.csv", {std::vector<double>{1.5}, dir / "bad"}), std::invalid_argument);
}

TEST_CASE("analyze refuses mismatched hashes", "[harness]") {
  const auto dir = scratch("mismatch");
  cmd_simulate(config_from_json(minimal_config(1, 2)), {dir, 1, true});

  // manifest edited after the run
  auto m = read_json_file(dir / "manifest.json");
  m["config"]["master_seed"] = 99;
  write_json_file(dir / "manifest.json", m);
  CHECK_THROWS_AS(cmd_analyze(dir / "records.csv"), ConfigError);

  // consistent manifest for a different config: rows no longer match it
  auto other = minimal_config(1, 2);
  other["master_seed"] = 99;
  write_json_file(dir / "manifest.json", manifest_json(config_from_json(other)));
  CHECK_THROWS_AS(cmd_analyze(dir / "records.csv"), ConfigError);
  CHECK_THROWS_AS(cmd_report(dir), ConfigError);

  fs::remove(dir / "manifest.json");
  CHECK_THROWS_AS(cmd_analyze(dir / "records.csv"), std::runtime_error);
}

TEST_CASE("sweep", "[harness]") {
  CHECK_THROWS_AS(cmd_sweep({}), std::invalid_argument);
  SweepOptions bad;
  bad.ratios = {0.5, 1.2};
  CHECK_THROWS_AS(cmd_sweep(bad), std::invalid_argument);
  bad.ratios = {0.0};
  CHECK_THROWS_AS(cmd_sweep(bad), std::invalid_argument);

  const auto dir = scratch("sweep");
  SweepOptions o;
  o.ratios = {0.2, 0.40, 0.42, 1.0};
  o.trials_per_point = 400;
  o.replicates = 5;
  o.out = dir / "benefit_curve.csv";
  const auto rows = cmd_sweep(o);
  REQUIRE(rows.size() == 4);
  CHECK(rows[3].theory == Approx(std::numbers::sqrt2));
  CHECK(rows[1].theory < 1.0);
  CHECK(rows[2].theory > 1.0);
  for (const auto& r : rows) {
    CHECK(r.simulated_se > 0.0);
    CHECK(r.replicates == 5);
  }
  CHECK(io::CsvTable::read(o.out->string()).size() == 4);
  const auto again = cmd_sweep(o);
  CHECK(again[0].simulated_mean == rows[0].simulated_mean);
}

TEST_CASE("report", "[harness]") {
  const auto one = scratch("report1");
  cmd_simulate(config_from_json(minimal_config(1, 2)), {one, 1, false});
  CHECK_THROWS_AS(cmd_report(one), std::invalid_argument);

  const auto three = scratch("report3");
  cmd_simulate(config_from_json(minimal_config(3, 8)), {three, 1, false});
  const auto rep = cmd_report(three);
  CHECK(rep["n_dyads"] == 3);
  CHECK(rep["benefit_regression"].contains("slope"));
  CHECK(rep["benefit_regression_theory"]["slope"].get<double>() == Approx(std::numbers::sqrt2 / 2));
  for (const char* f : {"fig3a.csv", "fig3b.csv", "fig2cd.csv", "report.json"}) CHECK(fs::exists(three / f));
  CHECK(io::CsvTable::read((three / "fig3a.csv").string()).size() == 3);
}

TEST_CASE("CLI exit codes", "[harness][cli]") {
  const auto dir = scratch("cli");
  write_json_file(dir / "good.json", minimal_config(2, 2));
  auto bad = minimal_config();
  bad.erase("master_seed");
  write_json_file(dir / "bad.json", bad);
  const std::string out = (dir / "run").string();

  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("simulate") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("simulate --config " + (dir / "bad.json").string() + " --out " + out) == 2);
  CHECK(run_cli("simulate --config " + (dir / "missing.json").string() + " --out " + out) == 3);
  CHECK(run_cli("simulate --config " + (dir / "good.json").string() + " --out /proc/hapdec_no_such_dir") == 3);
  REQUIRE(run_cli("simulate --config " + (dir / "good.json").string() + " --out " + out + " --workers 2") == 0);
  CHECK(io::CsvTable::read(out + "/records.csv").size() == 64);
  CHECK(run_cli("fit --records " + out + "/records.csv") == 0);
  CHECK(fs::exists(out + "/fits.json"));
  CHECK(run_cli("analyze --records " + out + "/records.csv --thresholds 0.05,0.1") == 0);
  CHECK(run_cli("analyze --records " + out + "/records.csv --thresholds 0.05,2") == 2);
  CHECK(run_cli("report --cohort " + out) == 0);
  CHECK(run_cli("sweep --ratios 0.5,1 --trials-per-point 50 --replicates 3 --out " + (dir / "b.csv").string()) == 0);
  CHECK(run_cli("sweep --ratios 0,1 --trials-per-point 50 --out " + (dir / "b.csv").string()) == 2);
  CHECK(run_cli("sweep --ratios , --trials-per-point 50 --out " + (dir / "b.csv").string()) == 2);
  CHECK(run_cli("fit --records " + (dir / "nothing.csv").string()) == 3);
}
