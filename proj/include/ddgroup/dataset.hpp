#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace ddgroup {

// Tabular regression data. Rows are observations, columns are features.
// Every entry is finite; feature_names has one label per column.
struct Dataset {
  Eigen::MatrixXd features;                // n x d
  Eigen::VectorXd targets;                 // n
  std::vector<std::string> feature_names;  // d labels
  int intercept_column = -1;               // index of the constant-1 column, -1 if none

  long n() const { return features.rows(); }
  long d() const { return features.cols(); }
  bool has_intercept_column() const { return intercept_column >= 0; }

  // Row subset in the order given. Indices must be in [0, n).
  Dataset subset(const std::vector<int>& rows) const;

  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

struct SplitSpec {
  double train_frac = 0.5;
  double val_frac = 0.3;
  double test_frac = 0.2;
  unsigned long seed = 0;
};

struct SplitResult {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Per-column location/scale fitted on a training split, applied elsewhere
// with the training statistics. The intercept column is exempt. Targets are
// standardized as well, so downstream errors are in standardized units.
struct Standardizer {
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_std;  // sample standard deviation, divisor n - 1
  double target_mean = 0.0;
  double target_std = 1.0;
  int intercept_column = -1;
};

// Reads a comma-separated file with a header row. The target column is
// removed from the features. When add_intercept is set a constant-1 column
// named "(intercept)" is appended and flagged; otherwise a single existing
// constant-1 column is detected and flagged. Cell errors name the file line
// and column. Row order is preserved.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 bool add_intercept = false);

// Writes a file that load_csv reads back with identical values. target_name
// labels the target column, which is written last.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& target_name = "y");

// Seeded shuffle, then contiguous assignment. Val and test receive
// floor(frac * n) rows each and train receives the remainder. Row order
// within each part follows the original dataset. Every part must be
// nonempty.
SplitResult split(const Dataset& data, const SplitSpec& spec);

Standardizer standardize_fit(const Dataset& train);
Dataset standardize_apply(const Standardizer& s, const Dataset& data);
// Inverse of standardize_apply.
Dataset destandardize(const Standardizer& s, const Dataset& data);

}  // namespace ddgroup
