#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ddgroup {

struct Neighbor {
  int index;
  double distance;
};

// Exact Euclidean k-nearest-neighbor search over a fixed point set, backed
// by a balanced k-d tree. The index owns a copy of the points; queries do
// not mutate state and are safe to run concurrently once built.
class KnnIndex {
 public:
  explicit KnnIndex(const Eigen::MatrixXd& points, int leaf_capacity = 16);

  // The k rows nearest to q, sorted by (distance, row index) ascending.
  // Equal distances resolve to the smaller row index. Requires
  // 1 <= k <= size() and q.size() == dim().
  std::vector<Neighbor> query(const Eigen::VectorXd& q, int k) const;

  long size() const { return points_.rows(); }
  long dim() const { return points_.cols(); }

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int begin = 0;  // leaf range into order_
    int end = 0;
    int split_dim = -1;
    double split_value = 0.0;
  };

  struct SearchHeap;

  int build(int begin, int end);
  void search(int node, const Eigen::VectorXd& q, SearchHeap& heap) const;

  Eigen::MatrixXd points_;
  std::vector<Node> nodes_;
  std::vector<int> order_;
  int leaf_capacity_;
  int root_ = -1;
};

}  // namespace ddgroup
