#include "ddgroup/pipeline.hpp"

#include "ddgroup/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace ddgroup {

namespace {

constexpr double kTheoryFactor = 2.1;
constexpr double kQuantileLevel = 0.9;
constexpr double kQuantileGate = 3.0;

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "?";
  return std::string(buf, ptr);
}

}  // namespace

ThresholdRule ThresholdRule::theory(std::optional<double> sigma) {
  ThresholdRule r;
  r.kind = Kind::theory;
  r.sigma = sigma;
  r.validate();
  return r;
}

ThresholdRule ThresholdRule::affine(double gamma1, double gamma2, std::optional<double> sigma) {
  ThresholdRule r;
  r.kind = Kind::affine;
  r.gamma1 = gamma1;
  r.gamma2 = gamma2;
  r.sigma = sigma;
  r.validate();
  return r;
}

ThresholdRule ThresholdRule::constant_rho(double rho) {
  ThresholdRule r;
  r.kind = Kind::constant;
  r.constant = rho;
  r.validate();
  return r;
}

void ThresholdRule::validate() const {
  if (sigma && !(*sigma > 0.0)) throw std::invalid_argument("threshold: sigma must be positive");
  switch (kind) {
    case Kind::theory:
      break;
    case Kind::affine:
      if (gamma1 < 0.0 || gamma2 < 0.0) throw std::invalid_argument("threshold: negative gamma");
      break;
    case Kind::constant:
      if (constant < 0.0) throw std::invalid_argument("threshold: negative rho");
      break;
  }
}

std::string ThresholdRule::describe() const {
  const std::string s = sigma ? fmt(*sigma) : "est";
  switch (kind) {
    case Kind::theory:
      return "theory(sigma=" + s + ")";
    case Kind::affine:
      return "affine(gamma1=" + fmt(gamma1) + ",gamma2=" + fmt(gamma2) + ",sigma=" + s + ")";
    case Kind::constant:
      return "constant(rho=" + fmt(constant) + ")";
  }
  return "?";
}

std::vector<unsigned char> reject_labels(const LinearFit& fit, const Dataset& data,
                                         const ThresholdRule& rule) {
  rule.validate();
  data.validate();
  if (fit.beta.size() != data.d()) throw std::invalid_argument("reject_labels: dimension mismatch");
  const long n = data.n();
  std::vector<unsigned char> labels(static_cast<size_t>(n), 0);
  if (n == 0) return labels;

  double sigma = 0.0;
  if (rule.kind != ThresholdRule::Kind::constant) {
    if (rule.sigma) {
      sigma = *rule.sigma;
    } else if (fit.sigma_hat) {
      sigma = *fit.sigma_hat;
    } else {
      throw std::runtime_error("reject_labels: sigma estimate unavailable (no degrees of freedom)");
    }
  }

  const double theory_rho =
      kTheoryFactor * sigma * std::sqrt(std::log(static_cast<double>(n)));
  for (long i = 0; i < n; ++i) {
    double rho = 0.0;
    switch (rule.kind) {
      case ThresholdRule::Kind::theory:
        rho = theory_rho;
        break;
      case ThresholdRule::Kind::affine:
        rho = sigma * (rule.gamma1 * data.features.row(i).norm() + rule.gamma2);
        break;
      case ThresholdRule::Kind::constant:
        rho = rule.constant;
        break;
    }
    const double resid = std::abs(data.targets(i) - data.features.row(i).dot(fit.beta));
    labels[static_cast<size_t>(i)] = resid >= rho ? 1 : 0;
  }
  return labels;
}

int CoreSize::resolve(long n, long d) const {
  if (absolute) {
    if (k <= d || k > n) throw std::invalid_argument("core size: need d < k <= n, got k = " + std::to_string(k));
    return k;
  }
  return core_size(n, d, fraction);
}

std::string CoreSize::describe() const {
  return absolute ? "k=" + std::to_string(k) : "p=" + fmt(fraction);
}

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig cfg;
  for (double p : {0.01, 0.05, 0.1, 0.15, 0.2}) cfg.core_sizes.push_back(CoreSize::frac(p));
  for (int e = -4; e <= 5; ++e) cfg.rules.push_back(ThresholdRule::affine(std::ldexp(1.0, e), 0.0));
  cfg.shrink_grid = {0.0, 0.1, 0.05, 0.025, 0.01};
  cfg.speeds = {SpeedPreset::uniform, SpeedPreset::bbox};
  return cfg;
}

std::vector<FitSettings> PipelineConfig::grid() const {
  if (core_sizes.empty() || rules.empty() || shrink_grid.empty() || speeds.empty())
    throw std::invalid_argument("pipeline config: empty grid axis");
  std::vector<FitSettings> out;
  out.reserve(core_sizes.size() * rules.size() * shrink_grid.size() * speeds.size());
  for (const CoreSize& core : core_sizes)
    for (const ThresholdRule& rule : rules)
      for (double shrink : shrink_grid)
        for (SpeedPreset speed : speeds) out.push_back(FitSettings{core, rule, shrink, speed, refit});
  return out;
}

bool GroupReport::has_flag(const std::string& name) const {
  return std::find(flags.begin(), flags.end(), name) != flags.end();
}

namespace {

const char* speed_name(SpeedPreset speed) {
  return speed == SpeedPreset::uniform ? "uniform" : "bbox";
}

Eigen::VectorXd speed_vector(SpeedPreset speed, const Box& train_bounds) {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(train_bounds.dims());
  if (speed == SpeedPreset::bbox) {
    for (long j = 0; j < train_bounds.dims(); ++j) {
      const double side = train_bounds.hi(j) - train_bounds.lo(j);
      if (side > 0.0) s(j) = side;
    }
  }
  return s;
}

std::vector<int> rows_in_box(const Dataset& data, const Box& box) {
  std::vector<int> rows;
  for (long i = 0; i < data.n(); ++i)
    if (box.contains(data.features.row(i).transpose())) rows.push_back(static_cast<int>(i));
  return rows;
}

// Phases two and three given an already-computed core group.
GroupReport run_phases(const Dataset& train, const Dataset& val, const CoreGroup& core,
                       const FitSettings& settings) {
  GroupReport report;
  report.core_center = core.center;
  report.core_anchor = core.anchor;
  report.core_k = static_cast<int>(core.members.size());
  report.sigma_core = core.fit.sigma_hat.value_or(0.0);
  report.rule = settings.rule.describe();
  report.shrink = settings.shrink;
  report.speeds = speed_name(settings.speed);

  const std::vector<unsigned char> labels = reject_labels(core.fit, train, settings.rule);
  long rejected_count = 0;
  for (unsigned char l : labels) rejected_count += l;
  Eigen::MatrixXd rejected(rejected_count, train.d());
  long r = 0;
  for (long i = 0; i < train.n(); ++i)
    if (labels[static_cast<size_t>(i)]) rejected.row(r++) = train.features.row(i);
  report.rejected_count = rejected_count;

  const Box train_bounds = bounding_box(train.features);
  const std::vector<Direction> dirs = axis_directions(speed_vector(settings.speed, train_bounds));
  report.region = grow_box(core.center, rejected, dirs, settings.shrink, train_bounds);
  report.box = box_of(report.region);
  report.volume = report.box.volume();

  report.fit = core.fit;
  const std::vector<int> train_rows = rows_in_box(train, report.box);
  report.train_fraction = static_cast<double>(train_rows.size()) / static_cast<double>(train.n());
  if (train_rows.empty()) {
    report.flags.push_back("degenerate");
  } else {
    Dataset inside = train.subset(train_rows);
    if (settings.refit) {
      try {
        report.fit = ols(inside.features, inside.targets, OlsMode::strict);
      } catch (const std::exception&) {
        report.flags.push_back("refit_failed");
      }
    }
    report.train_mse = mse(report.fit.beta, inside.features, inside.targets);
  }

  if (val.n() > 0) {
    if (val.d() != train.d()) throw std::invalid_argument("fit: validation dimension mismatch");
    const std::vector<int> val_rows = rows_in_box(val, report.box);
    report.val_fraction = static_cast<double>(val_rows.size()) / static_cast<double>(val.n());
    if (!val_rows.empty()) {
      Dataset inside = val.subset(val_rows);
      report.val_mse = mse(report.fit.beta, inside.features, inside.targets);
      report.val_q90 =
          abs_residual_quantile(report.fit.beta, inside.features, inside.targets, kQuantileLevel);
    }
  }
  return report;
}

}  // namespace

GroupReport fit_one(const Dataset& train, const Dataset& val, const FitSettings& settings, int jobs) {
  train.validate();
  const int k = settings.core.resolve(train.n(), train.d());
  KnnIndex index(train.features);
  CoreGroup core = find_core_group(train, k, index, jobs);
  return run_phases(train, val, core, settings);
}

void evaluate_test(GroupReport& report, const Dataset& test) {
  test.validate();
  if (test.n() == 0) return;
  const std::vector<int> rows = rows_in_box(test, report.box);
  report.test_fraction = static_cast<double>(rows.size()) / static_cast<double>(test.n());
  if (!rows.empty()) {
    Dataset inside = test.subset(rows);
    report.test_mse = mse(report.fit.beta, inside.features, inside.targets);
  }
}

SweepResult sweep(const Dataset& train, const Dataset& val, const PipelineConfig& config) {
  train.validate();
  val.validate();
  if (val.n() == 0) throw std::invalid_argument("sweep: selection needs a nonempty validation set");
  const std::vector<FitSettings> grid = config.grid();

  // one core-group search per distinct core size, shared by grid points
  KnnIndex index(train.features);
  std::map<int, CoreGroup> cores;
  std::map<int, std::string> core_errors;
  for (const FitSettings& settings : grid) {
    int k = 0;
    try {
      k = settings.core.resolve(train.n(), train.d());
    } catch (const std::exception&) {
      continue;  // resolution failures surface per grid point below
    }
    if (cores.count(k) || core_errors.count(k)) continue;
    try {
      cores.emplace(k, find_core_group(train, k, index, config.jobs));
    } catch (const std::exception& e) {
      core_errors.emplace(k, e.what());
    }
  }

  std::vector<GroupReport> log(grid.size());
  parallel_for(static_cast<long>(grid.size()), config.jobs, [&](long i) {
    const FitSettings& settings = grid[static_cast<size_t>(i)];
    GroupReport& entry = log[static_cast<size_t>(i)];
    try {
      const int k = settings.core.resolve(train.n(), train.d());
      auto it = cores.find(k);
      if (it == cores.end()) throw std::runtime_error(core_errors.at(k));
      entry = run_phases(train, val, it->second, settings);
    } catch (const std::exception& e) {
      entry.flags = {"failed", std::string("error: ") + e.what()};
      entry.rule = settings.rule.describe();
      entry.shrink = settings.shrink;
      entry.speeds = speed_name(settings.speed);
    }
    entry.grid_index = static_cast<int>(i);
    entry.seed = config.seed;
  });

  SweepResult result;
  result.log = std::move(log);
  result.best = config.selection == Selection::valmse ? select_valmse(result.log, config.p_min)
                                                      : quantile_select(result.log);
  return result;
}

GroupReport select_valmse(const std::vector<GroupReport>& log, double p_min) {
  if (p_min < 0.0 || p_min > 1.0) throw std::invalid_argument("select_valmse: p_min outside [0, 1]");
  const GroupReport* best = nullptr;
  for (const GroupReport& r : log) {
    if (r.has_flag("failed")) continue;
    if (!r.val_fraction || !r.val_mse) continue;
    if (*r.val_fraction < p_min) continue;
    if (!best || *r.val_mse < *best->val_mse ||
        (*r.val_mse == *best->val_mse &&
         (r.volume > best->volume || (r.volume == best->volume && r.grid_index < best->grid_index))))
      best = &r;
  }
  if (best) return *best;

  // no candidate covers p_min of the validation rows: fall back to the
  // widest coverage
  const GroupReport* widest = nullptr;
  for (const GroupReport& r : log) {
    if (r.has_flag("failed")) continue;
    const double frac = r.val_fraction.value_or(0.0);
    if (!widest || frac > widest->val_fraction.value_or(0.0)) widest = &r;
  }
  if (!widest) throw std::runtime_error("select_valmse: every grid point failed");
  GroupReport out = *widest;
  out.flags.push_back("fallback");
  return out;
}

GroupReport quantile_select(const std::vector<GroupReport>& log) {
  const GroupReport* best = nullptr;
  for (const GroupReport& r : log) {
    if (r.has_flag("failed")) continue;
    if (!r.val_q90) continue;
    if (*r.val_q90 > kQuantileGate * r.sigma_core) continue;
    if (!best || r.volume > best->volume) best = &r;
  }
  if (!best)
    throw std::runtime_error("quantile_select: no candidate passes the residual-quantile gate");
  return *best;
}

std::vector<GroupReport> fit_multi(const Dataset& train, const Dataset& val,
                                   const PipelineConfig& config, int groups,
                                   std::vector<GroupReport>* grid_log) {
  if (groups < 1) throw std::invalid_argument("fit_multi: need at least one group");
  train.validate();
  val.validate();

  std::vector<int> train_alive(static_cast<size_t>(train.n()));
  std::vector<int> val_alive(static_cast<size_t>(val.n()));
  for (size_t i = 0; i < train_alive.size(); ++i) train_alive[i] = static_cast<int>(i);
  for (size_t i = 0; i < val_alive.size(); ++i) val_alive[i] = static_cast<int>(i);

  std::vector<GroupReport> reports;
  for (int g = 0; g < groups; ++g) {
    GroupReport round_report;
    try {
      if (train_alive.size() < static_cast<size_t>(train.d()) + 2 || val_alive.empty())
        throw std::runtime_error("fit_multi: training data exhausted");
      SweepResult round = sweep(train.subset(train_alive), val.subset(val_alive), config);
      round_report = round.best;
      if (grid_log)
        for (GroupReport& entry : round.log) {
          entry.round = g;
          grid_log->push_back(std::move(entry));
        }
    } catch (const std::exception&) {
      if (reports.empty()) throw;
      reports.back().flags.push_back("training_exhausted");
      break;
    }
    round_report.round = g;
    reports.push_back(round_report);

    std::vector<int> train_next;
    for (int row : train_alive)
      if (!round_report.box.contains(train.features.row(row).transpose())) train_next.push_back(row);
    std::vector<int> val_next;
    for (int row : val_alive)
      if (!round_report.box.contains(val.features.row(row).transpose())) val_next.push_back(row);
    train_alive.swap(train_next);
    val_alive.swap(val_next);
  }
  return reports;
}

}  // namespace ddgroup
