#pragma once

#include "ddgroup/dataset.hpp"
#include "ddgroup/pipeline.hpp"

#include <vector>

namespace ddgroup {

struct KmeansResult {
  Eigen::MatrixXd centroids;    // K x d
  std::vector<int> assignment;  // nearest centroid per row, ties to the smaller id
  double wcss = 0.0;            // within-cluster sum of squares at the final state
  int iterations = 0;
};

// Seeded k-means++ initialization followed by Lloyd iterations until the
// assignment reaches a fixed point or max_iters passes. WCSS never
// increases across iterations. Deterministic under seed.
KmeansResult kmeans(const Eigen::MatrixXd& points, int k, unsigned long seed, int max_iters = 300);

struct ClusterSubgroup {
  int n_clusters = 0;
  int cluster = -1;          // selected cluster id
  std::vector<int> members;  // training rows of the selected cluster
  LinearFit fit;             // least squares on exactly the members
  Box region;                // per-dimension min/max envelope of the members
};

// For one K: clusters the training features, fits each cluster with more
// than d members, and keeps the lowest-MSE cluster. Errors when no cluster
// is eligible.
ClusterSubgroup cluster_subgroup_for_k(const Dataset& train, int n_clusters, unsigned long seed);

// Clustering baseline over a K grid (default 2 .. 2d), reported like a
// pipeline candidate and selected across K by the same validation rule the
// sweep would use.
GroupReport cluster_subgroup(const Dataset& train, const Dataset& val,
                             const std::vector<int>& k_grid, double p_min, bool refit,
                             unsigned long seed, Selection selection = Selection::valmse);

}  // namespace ddgroup
