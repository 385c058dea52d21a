#include "ddgroup/cli.hpp"

#include "ddgroup/baseline.hpp"
#include "ddgroup/dataset.hpp"
#include "ddgroup/parallel.hpp"
#include "ddgroup/pipeline.hpp"
#include "ddgroup/serialize.hpp"
#include "ddgroup/synth_eval.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ddgroup {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string single_line(std::string text) {
  for (char& c : text)
    if (c == '\n' || c == '\r') c = ' ';
  return text;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string fmt_fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

int default_jobs() {
  const unsigned cores = std::thread::hardware_concurrency();
  return cores > 0 ? static_cast<int>(cores) : 1;
}

// Collects outputs and their digests so the manifest lands last: exit code
// zero implies every file before it was written.
struct RunOutput {
  fs::path dir;
  json inputs = json::object();
  json outputs = json::object();
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  explicit RunOutput(const std::string& out_dir) : dir(out_dir) {
    if (!dir.empty()) fs::create_directories(dir);
  }

  void note_input(const fs::path& path, const std::string& bytes) {
    inputs[path.filename().string()] = fnv1a64_hex(bytes);
  }

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream out(dir / name, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    outputs[name] = fnv1a64_hex(bytes);
  }

  void note_output_file(const std::string& name) {
    outputs[name] = fnv1a64_hex(read_file(dir / name));
  }

  void finish(const std::string& command, const json& config, unsigned long seed) {
    const double duration =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json manifest{{"command", command},  {"config", config}, {"duration_seconds", duration},
                  {"inputs", inputs},    {"outputs", outputs}, {"seed", seed},
                  {"version", kVersion}};
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    const std::string bytes = json_string(manifest);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  }
};

// Config files are JSON objects. A manifest from an earlier run also works:
// its resolved config sits under "config".
json load_config(const std::string& path, RunOutput& run) {
  if (path.empty()) return json::object();
  const std::string bytes = read_file(path);
  run.note_input(path, bytes);
  json j = json::parse(bytes);
  if (j.is_object() && j.contains("command") && j.contains("config")) j = j.at("config");
  if (!j.is_object()) throw std::runtime_error("config file must hold a JSON object");
  return j;
}

template <typename T>
void merge(const CLI::App& cmd, const std::string& flag, const json& cfg, const std::string& key,
           T& value) {
  if (cmd.count(flag) == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string token = text.substr(start, end - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size())
      throw std::runtime_error(flag + ": cannot parse '" + token + "' as a number");
    values.push_back(v);
    if (end == text.size()) break;
    start = end + 1;
  }
  return values;
}

std::vector<long> parse_long_list(const std::string& text, const std::string& flag) {
  std::vector<long> values;
  for (double v : parse_double_list(text, flag)) {
    const long r = std::lround(v);
    if (static_cast<double>(r) != v)
      throw std::runtime_error(flag + ": expected an integer, got " + fmt_double(v));
    values.push_back(r);
  }
  return values;
}

std::vector<double> double_list(const CLI::App& cmd, const std::string& flag,
                                const std::string& text, const json& cfg, const std::string& key) {
  if (cmd.count(flag) > 0) return parse_double_list(text, flag);
  if (cfg.contains(key)) return cfg.at(key).get<std::vector<double>>();
  return {};
}

std::vector<long> long_list(const CLI::App& cmd, const std::string& flag, const std::string& text,
                            const json& cfg, const std::string& key) {
  if (cmd.count(flag) > 0) return parse_long_list(text, flag);
  if (cfg.contains(key)) return cfg.at(key).get<std::vector<long>>();
  return {};
}

Box destandardize_box(const Standardizer& s, const Box& box) {
  Box out = box;
  for (long j = 0; j < box.lo.size(); ++j) {
    out.lo(j) = box.lo(j) * s.feature_std(j) + s.feature_mean(j);
    out.hi(j) = box.hi(j) * s.feature_std(j) + s.feature_mean(j);
  }
  return out;
}

// Report JSON plus a "score" entry against the best-overlapping truth region
// when a truth sidecar was supplied.
json scored_report(const GroupReport& report, const std::optional<Standardizer>& scaler,
                   const std::optional<SynthConfig>& truth) {
  json j = report;
  if (truth) {
    Box box = report.box;
    if (scaler) box = destandardize_box(*scaler, box);
    RegionScore best{};
    int best_region = -1;
    for (size_t r = 0; r < truth->regions.size(); ++r) {
      const RegionScore s = score_region(box, truth->regions[r].region);
      if (best_region < 0 || s.f1 > best.f1) {
        best = s;
        best_region = static_cast<int>(r);
      }
    }
    j["score"] = best;
    j["score"]["truth_region"] = best_region;
  }
  return j;
}

struct SynthFlags {
  std::string config_path;
  std::string instance = "demo";
  std::string out_dir = ".";
  long n = 1000;
  unsigned long seed = 0;
};

struct FitFlags {
  std::string data_path;
  std::string target = "y";
  std::string config_path;
  std::string out_dir = ".";
  std::string split_text = "0.5,0.3,0.2";
  std::string selection = "valmse";
  std::string speeds;
  std::string baseline;
  std::string score_truth;
  std::string core_fracs, core_sizes, rho, gamma1, shrink, kmeans_grid;
  unsigned long seed = 0;
  int groups = 1;
  int jobs = 0;
  double p_min = 0.05;
  double theory_sigma = 0.0;
  bool standardize = false;
  bool add_intercept = false;
  bool no_refit = false;
  bool theory = false;
};

struct BenchFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::string n_grid_text;
  int trials = 20;
  int jobs = 0;
  unsigned long seed = 0;
};

struct ScoreFlags {
  std::string estimate;
  std::string truth;
  std::string out_dir = ".";
};

int run_synth(const CLI::App& cmd, const SynthFlags& f) {
  RunOutput run(f.out_dir);
  const json cfg = load_config(f.config_path, run);

  std::string instance = f.instance;
  long n = f.n;
  unsigned long seed = f.seed;
  merge(cmd, "--instance", cfg, "instance", instance);
  merge(cmd, "--n", cfg, "n", n);
  merge(cmd, "--seed", cfg, "seed", seed);

  SynthConfig sc;
  if (cfg.contains("domain")) {
    sc = cfg.get<SynthConfig>();
    if (cmd.count("--n") > 0) sc.n = n;
    if (cmd.count("--seed") > 0) sc.seed = seed;
  } else if (instance == "demo") {
    sc = make_demo_instance(n, seed);
  } else if (instance == "bench") {
    sc = make_bench_instance(n, seed);
  } else {
    throw std::runtime_error("--instance: expected demo or bench");
  }
  sc.validate();

  const SynthData result = generate(sc);
  save_csv(result.data, run.dir / "data.csv", "y");
  run.note_output_file("data.csv");
  run.write("truth.json", json_string(json(sc)));
  run.finish("synth", json(sc), sc.seed);
  return 0;
}

int run_fit(const CLI::App& cmd, const FitFlags& f) {
  RunOutput run(f.out_dir);
  const json cfg = load_config(f.config_path, run);

  std::string target = f.target;
  unsigned long seed = f.seed;
  int groups = f.groups;
  int jobs = f.jobs;
  double p_min = f.p_min;
  std::string selection = f.selection;
  bool standardize = f.standardize;
  bool add_intercept = f.add_intercept;
  merge(cmd, "--target", cfg, "target", target);
  merge(cmd, "--seed", cfg, "seed", seed);
  merge(cmd, "--groups", cfg, "groups", groups);
  merge(cmd, "--jobs", cfg, "jobs", jobs);
  merge(cmd, "--p-min", cfg, "p_min", p_min);
  merge(cmd, "--selection", cfg, "selection", selection);
  merge(cmd, "--standardize", cfg, "standardize", standardize);
  merge(cmd, "--add-intercept", cfg, "add_intercept", add_intercept);
  if (jobs <= 0) jobs = default_jobs();
  if (groups < 1) throw std::runtime_error("--groups: need at least one");

  bool refit = !f.no_refit;
  if (cmd.count("--no-refit") == 0 && cfg.contains("refit")) refit = cfg.at("refit").get<bool>();

  std::string speeds = "both";
  if (cmd.count("--speeds") > 0) speeds = f.speeds;
  else if (cfg.contains("speeds")) speeds = cfg.at("speeds").get<std::string>();

  std::string baseline;
  if (cmd.count("--baseline") > 0) baseline = f.baseline;
  else if (cfg.contains("baseline") && !cfg.at("baseline").is_null())
    baseline = cfg.at("baseline").get<std::string>();

  std::vector<double> split_fracs = {0.5, 0.3, 0.2};
  if (cmd.count("--split") > 0) split_fracs = parse_double_list(f.split_text, "--split");
  else if (cfg.contains("split")) split_fracs = cfg.at("split").get<std::vector<double>>();
  if (split_fracs.size() != 3)
    throw std::runtime_error("--split: expected train,val,test fractions");

  const std::vector<double> core_fracs =
      double_list(cmd, "--core-fracs", f.core_fracs, cfg, "core_fracs");
  const std::vector<long> core_sizes =
      long_list(cmd, "--core-sizes", f.core_sizes, cfg, "core_sizes");
  const std::vector<double> rho = double_list(cmd, "--rho", f.rho, cfg, "rho");
  const std::vector<double> gamma1 = double_list(cmd, "--gamma1", f.gamma1, cfg, "gamma1");
  const std::vector<double> shrink = double_list(cmd, "--shrink", f.shrink, cfg, "shrink");
  const std::vector<long> kmeans_grid =
      long_list(cmd, "--kmeans-grid", f.kmeans_grid, cfg, "kmeans_grid");

  bool theory = f.theory;
  merge(cmd, "--theory", cfg, "theory", theory);
  std::optional<double> theory_sigma;
  if (cmd.count("--theory-sigma") > 0) theory_sigma = f.theory_sigma;
  else if (cfg.contains("theory_sigma") && !cfg.at("theory_sigma").is_null())
    theory_sigma = cfg.at("theory_sigma").get<double>();

  PipelineConfig pc = PipelineConfig::defaults();
  pc.p_min = p_min;
  pc.refit = refit;
  pc.seed = seed;
  pc.jobs = jobs;
  if (selection == "valmse") pc.selection = Selection::valmse;
  else if (selection == "quantile") pc.selection = Selection::quantile;
  else throw std::runtime_error("--selection: expected valmse or quantile");

  if (!core_sizes.empty() || !core_fracs.empty()) {
    pc.core_sizes.clear();
    for (long k : core_sizes) pc.core_sizes.push_back(CoreSize::of(static_cast<int>(k)));
    for (double frac : core_fracs) pc.core_sizes.push_back(CoreSize::frac(frac));
  }
  if (theory || theory_sigma || !rho.empty() || !gamma1.empty()) {
    pc.rules.clear();
    if (theory_sigma) pc.rules.push_back(ThresholdRule::theory(*theory_sigma));
    else if (theory) pc.rules.push_back(ThresholdRule::theory());
    for (double r : rho) pc.rules.push_back(ThresholdRule::constant_rho(r));
    for (double g : gamma1) pc.rules.push_back(ThresholdRule::affine(g, 0.0));
  }
  if (!shrink.empty()) pc.shrink_grid = shrink;
  if (speeds == "uniform") pc.speeds = {SpeedPreset::uniform};
  else if (speeds == "bbox") pc.speeds = {SpeedPreset::bbox};
  else if (speeds == "both") pc.speeds = {SpeedPreset::uniform, SpeedPreset::bbox};
  else throw std::runtime_error("--speeds: expected uniform or bbox");

  const std::string data_bytes = read_file(f.data_path);
  run.note_input(f.data_path, data_bytes);
  const Dataset data = load_csv(f.data_path, target, add_intercept);
  SplitResult parts =
      split(data, SplitSpec{split_fracs[0], split_fracs[1], split_fracs[2], seed});

  std::optional<Standardizer> scaler;
  if (standardize) {
    scaler = standardize_fit(parts.train);
    parts.train = standardize_apply(*scaler, parts.train);
    parts.val = standardize_apply(*scaler, parts.val);
    parts.test = standardize_apply(*scaler, parts.test);
  }

  std::optional<SynthConfig> truth;
  if (!f.score_truth.empty()) {
    const std::string truth_bytes = read_file(f.score_truth);
    run.note_input(f.score_truth, truth_bytes);
    truth = json::parse(truth_bytes).get<SynthConfig>();
  }

  std::vector<GroupReport> reports;
  std::vector<GroupReport> grid_log;
  if (groups == 1) {
    SweepResult result = sweep(parts.train, parts.val, pc);
    reports.push_back(std::move(result.best));
    grid_log = std::move(result.log);
  } else {
    reports = fit_multi(parts.train, parts.val, pc, groups, &grid_log);
  }

  // Later groups are tested only on rows outside every earlier box, same as
  // the validation exclusion inside fit_multi.
  std::vector<int> test_alive(static_cast<size_t>(parts.test.n()));
  std::iota(test_alive.begin(), test_alive.end(), 0);
  for (GroupReport& report : reports) {
    evaluate_test(report, parts.test.subset(test_alive));
    std::vector<int> next;
    for (int row : test_alive)
      if (!report.box.contains(parts.test.features.row(row).transpose())) next.push_back(row);
    test_alive.swap(next);
  }
  if (scaler)
    for (GroupReport& report : reports) report.flags.push_back("standardized");

  std::optional<GroupReport> baseline_report;
  if (!baseline.empty()) {
    if (baseline != "kmeans") throw std::runtime_error("--baseline: only kmeans is available");
    std::vector<int> kgrid;
    for (long k : kmeans_grid) kgrid.push_back(static_cast<int>(k));
    GroupReport br = cluster_subgroup(parts.train, parts.val, kgrid, p_min, refit, seed,
                                      pc.selection);
    evaluate_test(br, parts.test);
    if (scaler) br.flags.push_back("standardized");
    baseline_report = std::move(br);
  }

  json report_json;
  if (groups == 1) {
    report_json = scored_report(reports[0], scaler, truth);
  } else {
    report_json = json::array();
    for (const GroupReport& report : reports)
      report_json.push_back(scored_report(report, scaler, truth));
  }
  run.write("report.json", json_string(report_json));
  run.write("grid_log.json", reports_json_string(grid_log));
  if (baseline_report)
    run.write("baseline_report.json", json_string(scored_report(*baseline_report, scaler, truth)));

  const json resolved{{"target", target},
                      {"seed", seed},
                      {"split", split_fracs},
                      {"groups", groups},
                      {"p_min", p_min},
                      {"selection", selection},
                      {"speeds", speeds},
                      {"baseline", baseline.empty() ? json(nullptr) : json(baseline)},
                      {"standardize", standardize},
                      {"add_intercept", add_intercept},
                      {"refit", refit},
                      {"jobs", jobs},
                      {"core_sizes", core_sizes},
                      {"core_fracs", core_fracs},
                      {"rho", rho},
                      {"gamma1", gamma1},
                      {"theory", theory},
                      {"theory_sigma", theory_sigma ? json(*theory_sigma) : json(nullptr)},
                      {"shrink", shrink},
                      {"kmeans_grid", kmeans_grid}};
  run.finish("fit", resolved, seed);
  return 0;
}

// The benchmark protocol: constant thresholds {2,...,64}, shrink grid
// {0.1,0.05,0.025,0.01}, core size n/20 of the full sample, uniform speeds,
// residual-quantile selection on an 80/20 train/validation split. A trial
// whose selection fails scores zero and is counted in the failures column.
std::pair<Dataset, Dataset> split_train_val(const Dataset& data, double val_frac,
                                            unsigned long seed) {
  const long n = data.n();
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(seed);
  for (long i = n - 1; i > 0; --i) {
    const long j = static_cast<long>(gen() % static_cast<unsigned long>(i + 1));
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }
  const long n_val = static_cast<long>(std::floor(val_frac * static_cast<double>(n) + 1e-9));
  std::vector<int> val_rows(order.begin(), order.begin() + n_val);
  std::vector<int> train_rows(order.begin() + n_val, order.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  return {data.subset(train_rows), data.subset(val_rows)};
}

PipelineConfig bench_pipeline_config(long n, unsigned long seed) {
  PipelineConfig pc;
  pc.core_sizes = {CoreSize::of(static_cast<int>(std::lround(static_cast<double>(n) / 20.0)))};
  pc.rules.clear();
  for (double rho : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0})
    pc.rules.push_back(ThresholdRule::constant_rho(rho));
  pc.shrink_grid = {0.1, 0.05, 0.025, 0.01};
  pc.speeds = {SpeedPreset::uniform};
  pc.selection = Selection::quantile;
  pc.p_min = 0.05;
  pc.seed = seed;
  pc.jobs = 1;
  return pc;
}

int run_bench(const CLI::App& cmd, const BenchFlags& f) {
  RunOutput run(f.out_dir);
  const json cfg = load_config(f.config_path, run);

  std::vector<long> n_grid = long_list(cmd, "--n-grid", f.n_grid_text, cfg, "n_grid");
  if (n_grid.empty()) n_grid = {200, 400, 800, 1600, 3200, 6400, 12800};
  int trials = f.trials;
  unsigned long seed = f.seed;
  int jobs = f.jobs;
  merge(cmd, "--trials", cfg, "trials", trials);
  merge(cmd, "--seed", cfg, "seed", seed);
  merge(cmd, "--jobs", cfg, "jobs", jobs);
  if (jobs <= 0) jobs = default_jobs();
  if (trials < 1) throw std::runtime_error("--trials: need at least one");
  for (long n : n_grid)
    if (n < 100) throw std::runtime_error("--n-grid: sample sizes below 100 are too small");

  struct Cell {
    double ddgroup = 0.0, kmeans = 0.0;
    bool ddgroup_failed = false, kmeans_failed = false;
  };
  std::vector<Cell> cells(n_grid.size() * static_cast<size_t>(trials));
  parallel_for(static_cast<long>(cells.size()), jobs, [&](long slot) {
    const long size_index = slot / trials;
    const unsigned long trial = static_cast<unsigned long>(slot % trials);
    const long n = n_grid[static_cast<size_t>(size_index)];
    const SynthConfig sc = make_bench_instance(n, seed + trial);
    const SynthData sample = generate(sc);
    const auto [train, val] = split_train_val(sample.data, 0.2, seed + trial);
    const Box& truth = sc.regions[0].region;
    Cell& cell = cells[static_cast<size_t>(slot)];
    try {
      const SweepResult result = sweep(train, val, bench_pipeline_config(n, seed + trial));
      cell.ddgroup = score_region(result.best.box, truth).f1;
    } catch (const std::exception&) {
      cell.ddgroup_failed = true;
    }
    try {
      const GroupReport report =
          cluster_subgroup(train, val, {}, 0.05, true, seed + trial, Selection::quantile);
      cell.kmeans = score_region(report.box, truth).f1;
    } catch (const std::exception&) {
      cell.kmeans_failed = true;
    }
  });

  struct Row {
    std::string method;
    long n = 0;
    int failures = 0;
    double mean = 0.0, sem = 0.0;
  };
  std::vector<Row> rows;
  for (size_t ni = 0; ni < n_grid.size(); ++ni) {
    for (const std::string& method : {std::string("ddgroup"), std::string("kmeans")}) {
      std::vector<double> f1(static_cast<size_t>(trials));
      int failures = 0;
      for (int t = 0; t < trials; ++t) {
        const Cell& cell = cells[ni * static_cast<size_t>(trials) + static_cast<size_t>(t)];
        f1[static_cast<size_t>(t)] = method == "ddgroup" ? cell.ddgroup : cell.kmeans;
        failures += method == "ddgroup" ? cell.ddgroup_failed : cell.kmeans_failed;
      }
      Row row{method, n_grid[ni], failures, 0.0, 0.0};
      for (double v : f1) row.mean += v;
      row.mean /= static_cast<double>(trials);
      if (trials > 1) {
        double ss = 0.0;
        for (double v : f1) ss += (v - row.mean) * (v - row.mean);
        row.sem = std::sqrt(ss / (trials - 1)) / std::sqrt(static_cast<double>(trials));
      }
      rows.push_back(row);
    }
  }

  std::string csv = "method,n,trials,failures,mean_f1,sem_f1\n";
  for (const Row& row : rows)
    csv += row.method + "," + std::to_string(row.n) + "," + std::to_string(trials) + "," +
           std::to_string(row.failures) + "," + fmt_double(row.mean) + "," +
           fmt_double(row.sem) + "\n";
  run.write("table.csv", csv);

  std::string md = "| method |";
  for (long n : n_grid) md += " n=" + std::to_string(n) + " |";
  md += "\n| --- |";
  for (size_t i = 0; i < n_grid.size(); ++i) md += " --- |";
  md += "\n";
  for (const std::string& method : {std::string("kmeans"), std::string("ddgroup")}) {
    md += "| " + method + " |";
    for (const Row& row : rows)
      if (row.method == method) md += " " + fmt_fixed2(row.mean) + " ± " + fmt_fixed2(row.sem) + " |";
    md += "\n";
  }
  run.write("table.md", md);

  const json resolved{{"n_grid", n_grid}, {"trials", trials}, {"seed", seed}, {"jobs", jobs}};
  run.finish("bench", resolved, seed);
  return 0;
}

int run_score(const ScoreFlags& f, std::ostream& out) {
  RunOutput run(f.out_dir);
  const std::string estimate_bytes = read_file(f.estimate);
  run.note_input(f.estimate, estimate_bytes);
  const std::string truth_bytes = read_file(f.truth);
  run.note_input(f.truth, truth_bytes);

  const json estimate = json::parse(estimate_bytes);
  const SynthConfig truth = json::parse(truth_bytes).get<SynthConfig>();
  if (truth.regions.empty()) throw std::runtime_error("truth sidecar has no regions");

  auto score_one = [&truth](const json& entry) {
    const Box box =
        entry.is_object() && entry.contains("box") ? entry.at("box").get<Box>() : entry.get<Box>();
    RegionScore best{};
    int best_region = -1;
    for (size_t r = 0; r < truth.regions.size(); ++r) {
      const RegionScore s = score_region(box, truth.regions[r].region);
      if (best_region < 0 || s.f1 > best.f1) {
        best = s;
        best_region = static_cast<int>(r);
      }
    }
    json j = best;
    j["truth_region"] = best_region;
    return j;
  };

  json result;
  if (estimate.is_array()) {
    result = json::array();
    for (const json& entry : estimate) result.push_back(score_one(entry));
  } else {
    result = score_one(estimate);
  }

  const std::string bytes = json_string(result);
  run.write("score.json", bytes);
  out << bytes;
  run.finish("score", json::object(), 0);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"axis-aligned subgroup discovery for linear regression"};
  app.name("ddgroup");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SynthFlags sf;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset and truth sidecar");
  synth->add_option("--config", sf.config_path, "JSON config (or a manifest from an earlier run)");
  synth->add_option("--instance", sf.instance, "built-in instance: demo or bench");
  synth->add_option("--n", sf.n, "number of rows");
  synth->add_option("--seed", sf.seed, "generator seed");
  synth->add_option("--out-dir", sf.out_dir, "output directory");

  FitFlags ff;
  CLI::App* fit = app.add_subcommand("fit", "discover subgroups in a CSV dataset");
  fit->add_option("data", ff.data_path, "input CSV")->required();
  fit->add_option("--target", ff.target, "target column name");
  fit->add_option("--config", ff.config_path, "JSON config (or a manifest from an earlier run)");
  fit->add_option("--out-dir", ff.out_dir, "output directory");
  fit->add_option("--seed", ff.seed, "split seed");
  fit->add_option("--split", ff.split_text, "train,val,test fractions");
  fit->add_option("--groups", ff.groups, "number of subgroups");
  fit->add_option("--p-min", ff.p_min, "minimum validation fraction for selection");
  fit->add_option("--selection", ff.selection, "selection rule: valmse or quantile");
  fit->add_option("--speeds", ff.speeds, "speed preset: uniform or bbox (default sweeps both)");
  fit->add_option("--baseline", ff.baseline, "also fit a baseline: kmeans");
  fit->add_option("--score-truth", ff.score_truth, "truth sidecar to score reports against");
  fit->add_option("--jobs", ff.jobs, "worker threads (default: all cores)");
  fit->add_flag("--standardize", ff.standardize, "standardize features and target on train");
  fit->add_flag("--add-intercept", ff.add_intercept, "append a constant-1 feature column");
  fit->add_flag("--no-refit", ff.no_refit, "keep the core fit instead of refitting in the box");
  fit->add_option("--core-fracs", ff.core_fracs, "core sizes as training fractions, comma separated");
  fit->add_option("--core-sizes", ff.core_sizes, "absolute core sizes, comma separated");
  fit->add_option("--rho", ff.rho, "constant thresholds, comma separated");
  fit->add_option("--gamma1", ff.gamma1, "affine threshold slopes, comma separated");
  fit->add_flag("--theory", ff.theory, "include the theory threshold with estimated sigma");
  fit->add_option("--theory-sigma", ff.theory_sigma, "include the theory threshold with this sigma");
  fit->add_option("--shrink", ff.shrink, "face pull-back grid, comma separated");
  fit->add_option("--kmeans-grid", ff.kmeans_grid, "baseline cluster counts, comma separated");

  BenchFlags bf;
  CLI::App* bench = app.add_subcommand("bench", "benchmark table over sample sizes");
  bench->add_option("--config", bf.config_path, "JSON config (or a manifest from an earlier run)");
  bench->add_option("--n-grid", bf.n_grid_text, "sample sizes, comma separated");
  bench->add_option("--trials", bf.trials, "trials per sample size");
  bench->add_option("--seed", bf.seed, "base seed");
  bench->add_option("--jobs", bf.jobs, "worker threads (default: all cores)");
  bench->add_option("--out-dir", bf.out_dir, "output directory");

  ScoreFlags cf;
  CLI::App* score = app.add_subcommand("score", "overlap of an estimate against a truth sidecar");
  score->add_option("--estimate", cf.estimate, "report JSON (single, array, or bare box)")
      ->required();
  score->add_option("--truth", cf.truth, "truth sidecar JSON")->required();
  score->add_option("--out-dir", cf.out_dir, "output directory");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("ddgroup");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (synth->parsed()) return run_synth(*synth, sf);
    if (fit->parsed()) return run_fit(*fit, ff);
    if (bench->parsed()) return run_bench(*bench, bf);
    if (score->parsed()) return run_score(cf, out);
    throw std::runtime_error("expected a subcommand: synth, fit, bench, score");
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", single_line(e.what())}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << json{{"error", single_line(e.what())}}.dump() << "\n";
    return 1;
  }
}

}  // namespace ddgroup
