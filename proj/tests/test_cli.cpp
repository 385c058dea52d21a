#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddgroup/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  RunResult r;
  r.code = ddgroup::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "ddgroup_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json slurp_json(const fs::path& path) { return json::parse(slurp(path)); }

// small synthetic dataset + truth sidecar to feed fit/score
fs::path make_inputs(const std::string& name, const std::string& n = "600") {
  fs::path dir = fresh_dir(name);
  RunResult r = run({"synth", "--instance", "demo", "--n", n, "--seed", "7", "--out-dir",
                     dir.string()});
  REQUIRE(r.code == 0);
  return dir;
}

}  // namespace

TEST_CASE("version and help") {
  RunResult v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out == std::string(ddgroup::kVersion) + "\n");

  RunResult h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("synth") != std::string::npos);
  CHECK(h.out.find("fit") != std::string::npos);

  RunResult none = run({});
  CHECK(none.code == 1);
  CHECK(json::parse(none.err).contains("error"));
}

TEST_CASE("unknown flags and subcommands fail with one-line JSON errors") {
  for (auto args : {std::vector<std::string>{"frobnicate"},
                    std::vector<std::string>{"synth", "--joules", "3"},
                    std::vector<std::string>{"fit"}}) {
    RunResult r = run(args);
    CHECK(r.code == 1);
    CHECK(r.out.empty());
    REQUIRE_FALSE(r.err.empty());
    CHECK(r.err.back() == '\n');
    CHECK(r.err.find('\n') == r.err.size() - 1);  // a single line
    CHECK(json::parse(r.err).contains("error"));
  }
}

TEST_CASE("synth writes a dataset, truth sidecar, and manifest") {
  fs::path dir = fresh_dir("synth_basic");
  RunResult r = run({"synth", "--instance", "demo", "--n", "200", "--seed", "3", "--out-dir",
                     dir.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "data.csv"));
  CHECK(fs::exists(dir / "truth.json"));
  CHECK(fs::exists(dir / "manifest.json"));

  json truth = slurp_json(dir / "truth.json");
  CHECK(truth["n"] == 200);
  CHECK(truth["seed"] == 3);
  CHECK(truth["regions"].size() == 1);
  CHECK(truth["sigma_out"] == 5.0);

  json manifest = slurp_json(dir / "manifest.json");
  CHECK(manifest["command"] == "synth");
  CHECK(manifest["version"] == ddgroup::kVersion);
  CHECK(manifest["outputs"].contains("data.csv"));
  CHECK(manifest["outputs"].contains("truth.json"));

  const std::string header = slurp(dir / "data.csv").substr(0, 12);
  CHECK(header.rfind("x1,", 0) == 0);
}

TEST_CASE("synth output is byte identical across runs") {
  fs::path a = fresh_dir("synth_a");
  fs::path b = fresh_dir("synth_b");
  for (const fs::path& dir : {a, b}) {
    RunResult r = run({"synth", "--instance", "bench", "--n", "300", "--seed", "11",
                       "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
  }
  CHECK(slurp(a / "data.csv") == slurp(b / "data.csv"));
  CHECK(slurp(a / "truth.json") == slurp(b / "truth.json"));

  fs::path c = fresh_dir("synth_c");
  RunResult r = run({"synth", "--instance", "bench", "--n", "300", "--seed", "12", "--out-dir",
                     c.string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(a / "data.csv") != slurp(c / "data.csv"));
}

TEST_CASE("synth accepts a full JSON config and rejects a bad one") {
  fs::path dir = fresh_dir("synth_cfg");
  json cfg = {
      {"domain", {{"lo", {-1.0, -1.0}}, {"hi", {1.0, 1.0}}}},
      {"regions",
       {{{"region", {{"lo", {-0.5, -0.5}}, {"hi", {0.5, 0.5}}}},
         {"beta", {1.0, -1.0}},
         {"sigma_in", 0.1}}}},
      {"sigma_out", 3.0},
      {"n", 150},
      {"seed", 4},
  };
  fs::path cfg_path = dir / "config.json";
  std::ofstream(cfg_path) << cfg.dump(2);
  RunResult ok = run({"synth", "--config", cfg_path.string(), "--out-dir", dir.string()});
  REQUIRE(ok.code == 0);
  CHECK(slurp_json(dir / "truth.json")["n"] == 150);

  // sigma_in at or above sigma_out is invalid
  cfg["regions"][0]["sigma_in"] = 3.0;
  std::ofstream(cfg_path) << cfg.dump(2);
  RunResult bad = run({"synth", "--config", cfg_path.string(), "--out-dir", dir.string()});
  CHECK(bad.code == 1);
  std::string msg = json::parse(bad.err)["error"];
  CHECK(msg.find("sigma_in") != std::string::npos);
}

TEST_CASE("fit produces a report and grid log") {
  fs::path in = make_inputs("fit_basic");
  fs::path out = fresh_dir("fit_basic_out");
  RunResult r = run({"fit", (in / "data.csv").string(), "--out-dir", out.string(), "--seed",
                     "5", "--core-fracs", "0.1", "--rho", "2,8", "--shrink", "0.0",
                     "--speeds", "uniform", "--jobs", "1"});
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists(out / "report.json"));
  REQUIRE(fs::exists(out / "grid_log.json"));
  REQUIRE(fs::exists(out / "manifest.json"));
  CHECK_FALSE(fs::exists(out / "baseline_report.json"));

  json report = slurp_json(out / "report.json");
  CHECK(report.is_object());
  CHECK(report["method"] == "ddgroup");
  CHECK(report["box"].contains("lo"));
  CHECK(report["fit"].contains("beta"));
  CHECK(report.contains("val_mse"));
  CHECK_FALSE(report.contains("score"));

  json log = slurp_json(out / "grid_log.json");
  REQUIRE(log.is_array());
  CHECK(log.size() == 2);  // one core size x two thresholds x one shrink x one speed
  CHECK(log[0]["grid_index"] == 0);
  CHECK(log[1]["grid_index"] == 1);

  json manifest = slurp_json(out / "manifest.json");
  CHECK(manifest["command"] == "fit");
  CHECK(manifest["config"]["target"] == "y");
  CHECK(manifest["inputs"].contains("data.csv"));
}

TEST_CASE("fit scores against a truth sidecar on request") {
  fs::path in = make_inputs("fit_scored");
  fs::path out = fresh_dir("fit_scored_out");
  RunResult r = run({"fit", (in / "data.csv").string(), "--out-dir", out.string(), "--seed",
                     "5", "--core-fracs", "0.1", "--theory-sigma", "0.3", "--shrink", "0.0",
                     "--speeds", "uniform", "--score-truth", (in / "truth.json").string(),
                     "--jobs", "1"});
  REQUIRE(r.code == 0);
  json report = slurp_json(out / "report.json");
  REQUIRE(report.contains("score"));
  CHECK(report["score"].contains("f1"));
  CHECK(report["score"]["truth_region"] == 0);
  CHECK(report["score"]["f1"].get<double>() >= 0.0);
}

TEST_CASE("fit with groups emits an array and the baseline writes its own report") {
  fs::path in = make_inputs("fit_multi", "900");
  fs::path out = fresh_dir("fit_multi_out");
  RunResult r = run({"fit", (in / "data.csv").string(), "--out-dir", out.string(), "--seed",
                     "5", "--groups", "2", "--core-fracs", "0.1", "--rho", "4", "--shrink",
                     "0.0", "--speeds", "uniform", "--baseline", "kmeans", "--kmeans-grid",
                     "2,3", "--jobs", "1"});
  REQUIRE(r.code == 0);
  json report = slurp_json(out / "report.json");
  REQUIRE(report.is_array());
  CHECK(report.size() >= 1);
  CHECK(report[0]["round"] == 0);

  json grid_log = slurp_json(out / "grid_log.json");
  CHECK(grid_log.size() >= report.size());

  json baseline = slurp_json(out / "baseline_report.json");
  CHECK(baseline["method"] == "kmeans");
  std::string rule = baseline["rule"];
  CHECK(rule.rfind("clusters=", 0) == 0);
}

TEST_CASE("fit replays byte-identically from its own manifest") {
  fs::path in = make_inputs("fit_replay");
  fs::path out1 = fresh_dir("fit_replay_out1");
  RunResult first = run({"fit", (in / "data.csv").string(), "--out-dir", out1.string(),
                         "--seed", "9", "--core-fracs", "0.05,0.1", "--rho", "2,4",
                         "--shrink", "0.0,0.05", "--speeds", "uniform", "--jobs", "1"});
  REQUIRE(first.code == 0);

  fs::path out2 = fresh_dir("fit_replay_out2");
  RunResult second = run({"fit", (in / "data.csv").string(), "--config",
                          (out1 / "manifest.json").string(), "--out-dir", out2.string()});
  REQUIRE(second.code == 0);
  CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
  CHECK(slurp(out1 / "grid_log.json") == slurp(out2 / "grid_log.json"));
}

TEST_CASE("standardization is recorded and the box is destandardized for scoring") {
  fs::path in = make_inputs("fit_std");
  fs::path out = fresh_dir("fit_std_out");
  RunResult r = run({"fit", (in / "data.csv").string(), "--out-dir", out.string(), "--seed",
                     "5", "--standardize", "--core-fracs", "0.1", "--rho", "2", "--shrink",
                     "0.0", "--speeds", "uniform", "--score-truth",
                     (in / "truth.json").string(), "--jobs", "1"});
  REQUIRE(r.code == 0);
  json report = slurp_json(out / "report.json");
  const auto& flags = report["flags"];
  CHECK(std::find(flags.begin(), flags.end(), "standardized") != flags.end());
  // scoring happens in the original units, so a sane overlap is possible
  CHECK(report["score"]["f1"].get<double>() >= 0.0);
  CHECK(report["score"]["f1"].get<double>() <= 1.0);
}

TEST_CASE("fit errors cleanly on a missing input or bad split") {
  fs::path out = fresh_dir("fit_errs");
  RunResult missing = run({"fit", (out / "nope.csv").string(), "--out-dir", out.string()});
  CHECK(missing.code == 1);
  CHECK(json::parse(missing.err).contains("error"));

  fs::path in = make_inputs("fit_badsplit");
  RunResult bad = run({"fit", (in / "data.csv").string(), "--out-dir", out.string(),
                       "--split", "0.5,0.5"});
  CHECK(bad.code == 1);
  std::string msg = json::parse(bad.err)["error"];
  CHECK(msg.find("split") != std::string::npos);
}

TEST_CASE("score compares an estimate against the truth") {
  fs::path in = make_inputs("score_in");
  fs::path dir = fresh_dir("score_out");

  // a bare box estimate equal to the planted region scores perfectly
  json truth = slurp_json(in / "truth.json");
  json est = {{"box", truth["regions"][0]["region"]}};
  fs::path est_path = dir / "estimate.json";
  std::ofstream(est_path) << est.dump();

  RunResult r = run({"score", "--estimate", est_path.string(), "--truth",
                     (in / "truth.json").string(), "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  json from_stdout = json::parse(r.out);
  json from_file = slurp_json(dir / "score.json");
  CHECK(from_stdout == from_file);
  CHECK(from_stdout["precision"].get<double>() == doctest::Approx(1.0));
  CHECK(from_stdout["recall"].get<double>() == doctest::Approx(1.0));
  CHECK(from_stdout["truth_region"] == 0);
}

TEST_CASE("bench writes the tidy table and the summary matrix") {
  fs::path dir = fresh_dir("bench_out");
  RunResult r = run({"bench", "--n-grid", "200", "--trials", "2", "--seed", "1", "--jobs",
                     "1", "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "table.csv");
  CHECK(csv.rfind("method,n,trials,failures,mean_f1,sem_f1\n", 0) == 0);
  CHECK(csv.find("ddgroup,200,2,") != std::string::npos);
  CHECK(csv.find("kmeans,200,2,") != std::string::npos);
  const std::string md = slurp(dir / "table.md");
  CHECK(md.find("| kmeans |") != std::string::npos);
  CHECK(md.find("| ddgroup |") != std::string::npos);

  RunResult tiny = run({"bench", "--n-grid", "50", "--trials", "1", "--out-dir",
                        dir.string()});
  CHECK(tiny.code == 1);  // sample sizes below 100 are rejected
}
