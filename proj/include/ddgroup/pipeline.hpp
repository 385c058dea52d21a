#pragma once

#include "ddgroup/coregroup.hpp"
#include "ddgroup/dataset.hpp"
#include "ddgroup/region.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ddgroup {

// Residual rejection threshold. theory uses rho = 2.1 * sigma * sqrt(ln n)
// with n the training size; affine uses rho(x) = sigma * (gamma1 * |x| +
// gamma2); constant uses rho directly. sigma comes from the field when set
// and from the core-group estimate otherwise.
struct ThresholdRule {
  enum class Kind { theory, affine, constant };

  Kind kind = Kind::theory;
  double constant = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  std::optional<double> sigma;

  static ThresholdRule theory(std::optional<double> sigma = std::nullopt);
  static ThresholdRule affine(double gamma1, double gamma2, std::optional<double> sigma = std::nullopt);
  static ThresholdRule constant_rho(double rho);

  void validate() const;
  std::string describe() const;
};

// One marker per training row: true when |y_i - beta . x_i| >= rho(x_i).
std::vector<unsigned char> reject_labels(const LinearFit& fit, const Dataset& data,
                                         const ThresholdRule& rule);

enum class SpeedPreset {
  uniform,  // every face advances at speed 1
  bbox,     // dimension j advances at a speed equal to its training
            // bounding-box side length (degenerate sides fall back to 1)
};

enum class Selection { valmse, quantile };

// Core size, either absolute or as a fraction of the training size
// (k = max(d + 1, round(fraction * n))).
struct CoreSize {
  bool absolute = false;
  int k = 0;
  double fraction = 0.0;

  static CoreSize of(int k) { return CoreSize{true, k, 0.0}; }
  static CoreSize frac(double fraction) { return CoreSize{false, 0, fraction}; }
  int resolve(long n, long d) const;
  std::string describe() const;
};

// One grid point of hyperparameters.
struct FitSettings {
  CoreSize core;
  ThresholdRule rule;
  double shrink = 0.0;
  SpeedPreset speed = SpeedPreset::uniform;
  bool refit = true;
};

struct PipelineConfig {
  std::vector<CoreSize> core_sizes;
  std::vector<ThresholdRule> rules;
  std::vector<double> shrink_grid;
  std::vector<SpeedPreset> speeds;
  double p_min = 0.05;
  bool refit = true;
  Selection selection = Selection::valmse;
  unsigned long seed = 0;  // recorded in reports; the pipeline draws nothing
  int jobs = 1;

  // Default hyperparameter grid: core fractions {0.01, 0.05, 0.1, 0.15,
  // 0.2}, affine rules gamma1 in {2^-4 .. 2^5} with gamma2 = 0 and sigma
  // estimated, shrink {0, 0.1, 0.05, 0.025, 0.01}, both speed presets.
  static PipelineConfig defaults();

  // Grid points in selection order: core size, then rule, then shrink,
  // then speed.
  std::vector<FitSettings> grid() const;
};

struct GroupReport {
  Region region;
  Box box;
  LinearFit fit;  // refit inside the box when enabled, else the core fit
  Eigen::VectorXd core_center;
  int core_anchor = -1;
  int core_k = 0;
  double sigma_core = 0.0;  // core-group residual scale estimate

  std::string method = "ddgroup";
  std::string rule;  // threshold description or cluster count
  double shrink = 0.0;
  std::string speeds;

  double train_fraction = 0.0;
  std::optional<double> val_fraction;
  std::optional<double> test_fraction;
  std::optional<double> train_mse;
  std::optional<double> val_mse;
  std::optional<double> test_mse;
  std::optional<double> val_q90;  // 0.9 abs-residual quantile on val rows in the box

  double volume = 0.0;
  long rejected_count = 0;
  int grid_index = 0;
  int round = 0;  // multi-group round, 0 for the first
  unsigned long seed = 0;
  std::vector<std::string> flags;

  bool has_flag(const std::string& name) const;
};

// Phases two and three for one grid point. val may be empty, which leaves
// the validation statistics unset. Test statistics are filled by
// evaluate_test when a held-out set exists.
GroupReport fit_one(const Dataset& train, const Dataset& val, const FitSettings& settings,
                    int jobs = 1);

// Adds test fraction and in-box test MSE to a report.
void evaluate_test(GroupReport& report, const Dataset& test);

struct SweepResult {
  GroupReport best;
  std::vector<GroupReport> log;  // one entry per grid point in grid order
};

// Evaluates the whole grid (core groups are shared across grid points with
// the same core size) and selects per config.selection.
SweepResult sweep(const Dataset& train, const Dataset& val, const PipelineConfig& config);

// Lowest in-box validation MSE among candidates whose box holds at least
// p_min of the validation rows; ties prefer larger volume, then earlier
// grid order. With no qualifying candidate, returns the one with the
// largest validation fraction, flagged "fallback". Candidates flagged
// "failed" are skipped.
GroupReport select_valmse(const std::vector<GroupReport>& log, double p_min);

// Largest-volume candidate whose 0.9 abs-residual quantile on validation
// rows inside the box is at most three times its core sigma estimate
// (strict at the boundary). Errors when no candidate qualifies.
GroupReport quantile_select(const std::vector<GroupReport>& log);

// Runs sweep up to `groups` times. After each round the training rows
// inside the selected box are removed, and validation rows inside any
// earlier box are excluded from later scoring. Stops early with a
// "training_exhausted" flag on the last report when too little training
// data remains. When grid_log is given, every round's full grid log is
// appended to it with the round recorded per entry.
std::vector<GroupReport> fit_multi(const Dataset& train, const Dataset& val,
                                   const PipelineConfig& config, int groups,
                                   std::vector<GroupReport>* grid_log = nullptr);

}  // namespace ddgroup
