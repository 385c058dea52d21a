#include "ddgroup/baseline.hpp"

#include "ddgroup/numerics.hpp"
#include "ddgroup/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ddgroup {

namespace {

double wcss_of(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
               const std::vector<int>& assignment) {
  double total = 0.0;
  for (long i = 0; i < points.rows(); ++i)
    total += (points.row(i) - centroids.row(assignment[static_cast<size_t>(i)])).squaredNorm();
  return total;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, int k, unsigned long seed, int max_iters) {
  const long n = points.rows();
  const long d = points.cols();
  if (n == 0) throw std::invalid_argument("kmeans: empty point set");
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: k outside [1, n]");
  if (max_iters < 1) throw std::invalid_argument("kmeans: max_iters must be positive");
  if (!points.allFinite()) throw std::invalid_argument("kmeans: non-finite point");

  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // k-means++ seeding: first centroid uniform, the rest by squared-distance
  // weighting
  Eigen::MatrixXd centroids(k, d);
  centroids.row(0) = points.row(static_cast<long>(gen() % static_cast<unsigned long>(n)));
  Eigen::VectorXd dist2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    long pick = 0;
    if (total > 0.0) {
      const double target = unif(gen) * total;
      double run = 0.0;
      pick = n - 1;
      for (long i = 0; i < n; ++i) {
        run += dist2(i);
        if (run >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<long>(gen() % static_cast<unsigned long>(n));
    }
    centroids.row(c) = points.row(pick);
    dist2 = dist2.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  KmeansResult result;
  result.assignment.assign(static_cast<size_t>(n), 0);
  std::vector<int> counts(static_cast<size_t>(k), 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (long i = 0; i < n; ++i) {
      int best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dd = (points.row(i) - centroids.row(c)).squaredNorm();
        if (dd < best_dist) {
          best_dist = dd;
          best = c;
        }
      }
      if (result.assignment[static_cast<size_t>(i)] != best || iter == 0) {
        if (iter > 0) changed = true;
        result.assignment[static_cast<size_t>(i)] = best;
      }
    }
    result.iterations = iter + 1;
    if (iter > 0 && !changed) break;

    std::fill(counts.begin(), counts.end(), 0);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
    for (long i = 0; i < n; ++i) {
      const int c = result.assignment[static_cast<size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<size_t>(c)];
    }
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<size_t>(c)] > 0)
        centroids.row(c) = sums.row(c) / counts[static_cast<size_t>(c)];
    // empty clusters keep their previous centroid
  }

  result.centroids = centroids;
  result.wcss = wcss_of(points, centroids, result.assignment);
  return result;
}

ClusterSubgroup cluster_subgroup_for_k(const Dataset& train, int n_clusters, unsigned long seed) {
  train.validate();
  KmeansResult clustering = kmeans(train.features, n_clusters, seed);

  ClusterSubgroup best;
  best.n_clusters = n_clusters;
  double best_mse = std::numeric_limits<double>::infinity();
  for (int c = 0; c < n_clusters; ++c) {
    std::vector<int> members;
    for (long i = 0; i < train.n(); ++i)
      if (clustering.assignment[static_cast<size_t>(i)] == c) members.push_back(static_cast<int>(i));
    if (members.size() <= static_cast<size_t>(train.d())) continue;
    Dataset sub = train.subset(members);
    LinearFit fit;
    try {
      fit = ols(sub.features, sub.targets, OlsMode::strict);
    } catch (const std::exception&) {
      continue;
    }
    if (fit.train_mse < best_mse) {
      best_mse = fit.train_mse;
      best.cluster = c;
      best.members = members;
      best.fit = fit;
      best.region = bounding_box(sub.features);
    }
  }
  if (best.cluster < 0)
    throw std::runtime_error("cluster_subgroup: no cluster has more than d members with full rank");
  return best;
}

GroupReport cluster_subgroup(const Dataset& train, const Dataset& val,
                             const std::vector<int>& k_grid, double p_min, bool refit,
                             unsigned long seed, Selection selection) {
  train.validate();
  val.validate();
  if (val.n() == 0) throw std::invalid_argument("cluster_subgroup: selection needs validation rows");

  std::vector<int> grid = k_grid;
  if (grid.empty())
    for (int k = 2; k <= 2 * static_cast<int>(train.d()); ++k) grid.push_back(k);

  std::vector<GroupReport> log;
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    GroupReport entry;
    entry.method = "kmeans";
    entry.rule = "clusters=" + std::to_string(grid[gi]);
    entry.grid_index = static_cast<int>(gi);
    entry.seed = seed;
    try {
      ClusterSubgroup sub =
          cluster_subgroup_for_k(train, grid[gi], seed + static_cast<unsigned long>(grid[gi]));
      entry.box = sub.region;
      entry.volume = sub.region.volume();
      entry.core_k = static_cast<int>(sub.members.size());
      entry.fit = sub.fit;
      if (sub.fit.sigma_hat) entry.sigma_core = *sub.fit.sigma_hat;

      std::vector<int> inside;
      for (long i = 0; i < train.n(); ++i)
        if (sub.region.contains(train.features.row(i).transpose())) inside.push_back(static_cast<int>(i));
      entry.train_fraction = static_cast<double>(inside.size()) / static_cast<double>(train.n());
      if (!inside.empty()) {
        Dataset in_train = train.subset(inside);
        if (refit) {
          try {
            entry.fit = ols(in_train.features, in_train.targets, OlsMode::strict);
          } catch (const std::exception&) {
            entry.flags.push_back("refit_failed");
          }
        }
        entry.train_mse = mse(entry.fit.beta, in_train.features, in_train.targets);
      } else {
        entry.flags.push_back("degenerate");
      }

      std::vector<int> val_rows;
      for (long i = 0; i < val.n(); ++i)
        if (sub.region.contains(val.features.row(i).transpose())) val_rows.push_back(static_cast<int>(i));
      entry.val_fraction = static_cast<double>(val_rows.size()) / static_cast<double>(val.n());
      if (!val_rows.empty()) {
        Dataset in_val = val.subset(val_rows);
        entry.val_mse = mse(entry.fit.beta, in_val.features, in_val.targets);
        entry.val_q90 = abs_residual_quantile(entry.fit.beta, in_val.features, in_val.targets, 0.9);
      }
    } catch (const std::exception& e) {
      entry.flags = {"failed", std::string("error: ") + e.what()};
    }
    log.push_back(std::move(entry));
  }

  if (selection == Selection::quantile) return quantile_select(log);
  return select_valmse(log, p_min);
}

}  // namespace ddgroup
