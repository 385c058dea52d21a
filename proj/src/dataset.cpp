#include "ddgroup/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ddgroup {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_cell(const std::string& raw, long file_line, const std::string& column) {
  std::string cell = trim(raw);
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || cell.empty() || !std::isfinite(value)) {
    throw std::runtime_error("unparseable cell at line " + std::to_string(file_line) +
                             ", column '" + column + "': '" + cell + "'");
  }
  return value;
}

int detect_intercept_column(const Eigen::MatrixXd& features) {
  int found = -1;
  for (long j = 0; j < features.cols(); ++j) {
    if ((features.col(j).array() == 1.0).all()) {
      if (found >= 0) return -1;  // ambiguous, leave unflagged
      found = static_cast<int>(j);
    }
  }
  return found;
}

std::string format_value(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

}  // namespace

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.features.resize(static_cast<long>(rows.size()), d());
  out.targets.resize(static_cast<long>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= n()) throw std::invalid_argument("subset: row index out of range");
    out.features.row(static_cast<long>(i)) = features.row(rows[i]);
    out.targets(static_cast<long>(i)) = targets(rows[i]);
  }
  out.feature_names = feature_names;
  out.intercept_column = intercept_column;
  return out;
}

void Dataset::validate() const {
  if (targets.size() != n()) throw std::invalid_argument("dataset: targets length differs from row count");
  if (static_cast<long>(feature_names.size()) != d())
    throw std::invalid_argument("dataset: feature_names length differs from column count");
  if (!features.allFinite() || !targets.allFinite())
    throw std::invalid_argument("dataset: non-finite entry");
  if (intercept_column >= 0) {
    if (intercept_column >= d()) throw std::invalid_argument("dataset: intercept column out of range");
    if (n() > 0 && !(features.col(intercept_column).array() == 1.0).all())
      throw std::invalid_argument("dataset: flagged intercept column is not constant 1");
  }
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 bool add_intercept) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path.string());
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);
  if (header.empty()) throw std::runtime_error("empty header row");
  for (size_t i = 0; i < header.size(); ++i)
    for (size_t j = i + 1; j < header.size(); ++j)
      if (header[i] == header[j]) throw std::runtime_error("duplicate column name '" + header[i] + "'");

  long target_idx = -1;
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == target_column) target_idx = static_cast<long>(i);
  if (target_idx < 0) throw std::runtime_error("target column '" + target_column + "' not found");

  std::vector<std::vector<double>> rows;
  long file_line = 1;
  while (std::getline(in, line)) {
    ++file_line;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("line " + std::to_string(file_line) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    }
    std::vector<double> row(cells.size());
    for (size_t c = 0; c < cells.size(); ++c)
      row[c] = parse_cell(cells[c], file_line, header[c]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path.string());

  const long n = static_cast<long>(rows.size());
  const long d_in = static_cast<long>(header.size()) - 1;
  Dataset data;
  data.features.resize(n, d_in + (add_intercept ? 1 : 0));
  data.targets.resize(n);
  for (long i = 0; i < n; ++i) {
    long col = 0;
    for (long c = 0; c < static_cast<long>(header.size()); ++c) {
      if (c == target_idx) {
        data.targets(i) = rows[i][c];
      } else {
        data.features(i, col++) = rows[i][c];
      }
    }
    if (add_intercept) data.features(i, d_in) = 1.0;
  }
  for (long c = 0; c < static_cast<long>(header.size()); ++c)
    if (c != target_idx) data.feature_names.push_back(header[c]);
  if (add_intercept) {
    data.feature_names.emplace_back("(intercept)");
    data.intercept_column = static_cast<int>(d_in);
  } else {
    data.intercept_column = detect_intercept_column(data.features);
  }

  if (n > 1 && (data.targets.array() == data.targets(0)).all())
    throw std::runtime_error("target column '" + target_column + "' is constant");

  data.validate();
  return data;
}

void save_csv(const Dataset& data, const std::filesystem::path& path, const std::string& target_name) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  for (long j = 0; j < data.d(); ++j) out << data.feature_names[j] << ',';
  out << target_name << '\n';
  for (long i = 0; i < data.n(); ++i) {
    for (long j = 0; j < data.d(); ++j) out << format_value(data.features(i, j)) << ',';
    out << format_value(data.targets(i)) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SplitResult split(const Dataset& data, const SplitSpec& spec) {
  data.validate();
  const long n = data.n();
  if (n < 3) throw std::invalid_argument("split: need at least 3 rows");
  const double fracs[3] = {spec.train_frac, spec.val_frac, spec.test_frac};
  for (double f : fracs)
    if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("split: fractions must lie in (0, 1)");
  if (std::abs(spec.train_frac + spec.val_frac + spec.test_frac - 1.0) > 1e-12)
    throw std::invalid_argument("split: fractions must sum to 1");

  // floor with a small guard so exact products like 0.3 * 1000 do not land
  // one below the integer
  const long n_val = static_cast<long>(std::floor(spec.val_frac * static_cast<double>(n) + 1e-9));
  const long n_test = static_cast<long>(std::floor(spec.test_frac * static_cast<double>(n) + 1e-9));
  const long n_train = n - n_val - n_test;
  if (n_train < 1 || n_val < 1 || n_test < 1)
    throw std::invalid_argument("split: a part would be empty at n = " + std::to_string(n));

  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 gen(spec.seed);
  for (long i = n - 1; i > 0; --i) {
    long j = static_cast<long>(gen() % static_cast<unsigned long>(i + 1));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }

  std::vector<int> tr(idx.begin(), idx.begin() + n_train);
  std::vector<int> va(idx.begin() + n_train, idx.begin() + n_train + n_val);
  std::vector<int> te(idx.begin() + n_train + n_val, idx.end());
  std::sort(tr.begin(), tr.end());
  std::sort(va.begin(), va.end());
  std::sort(te.begin(), te.end());
  return SplitResult{data.subset(tr), data.subset(va), data.subset(te)};
}

Standardizer standardize_fit(const Dataset& train) {
  train.validate();
  if (train.n() < 2) throw std::invalid_argument("standardize_fit: need at least 2 rows");
  const long n = train.n();
  const long d = train.d();
  Standardizer s;
  s.intercept_column = train.intercept_column;
  s.feature_mean = train.features.colwise().mean();
  s.feature_std.resize(d);
  for (long j = 0; j < d; ++j) {
    double var = (train.features.col(j).array() - s.feature_mean(j)).square().sum() /
                 static_cast<double>(n - 1);
    s.feature_std(j) = std::sqrt(var);
    if (j == s.intercept_column) {
      s.feature_mean(j) = 0.0;
      s.feature_std(j) = 1.0;
    } else if (s.feature_std(j) <= 0.0) {
      throw std::runtime_error("standardize_fit: zero-variance feature '" + train.feature_names[j] + "'");
    }
  }
  s.target_mean = train.targets.mean();
  double tvar = (train.targets.array() - s.target_mean).square().sum() / static_cast<double>(n - 1);
  s.target_std = std::sqrt(tvar);
  if (s.target_std <= 0.0) throw std::runtime_error("standardize_fit: zero-variance target");
  return s;
}

Dataset standardize_apply(const Standardizer& s, const Dataset& data) {
  data.validate();
  if (data.d() != s.feature_mean.size())
    throw std::invalid_argument("standardize_apply: dimension mismatch");
  Dataset out = data;
  for (long j = 0; j < data.d(); ++j)
    out.features.col(j) = (data.features.col(j).array() - s.feature_mean(j)) / s.feature_std(j);
  out.targets = (data.targets.array() - s.target_mean) / s.target_std;
  return out;
}

Dataset destandardize(const Standardizer& s, const Dataset& data) {
  data.validate();
  if (data.d() != s.feature_mean.size())
    throw std::invalid_argument("destandardize: dimension mismatch");
  Dataset out = data;
  for (long j = 0; j < data.d(); ++j)
    out.features.col(j) = data.features.col(j).array() * s.feature_std(j) + s.feature_mean(j);
  out.targets = data.targets.array() * s.target_std + s.target_mean;
  return out;
}

}  // namespace ddgroup
