#include "ddgroup/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace ddgroup {

// Max-heap of (squared distance, row index); the top is the current worst
// candidate under lexicographic order, so equal distances keep the smaller
// row index.
struct KnnIndex::SearchHeap {
  std::priority_queue<std::pair<double, int>> heap;
  size_t capacity;

  explicit SearchHeap(size_t k) : capacity(k) {}

  bool full() const { return heap.size() == capacity; }
  double worst() const { return heap.top().first; }

  void offer(double dist2, int index) {
    if (!full()) {
      heap.emplace(dist2, index);
    } else if (std::make_pair(dist2, index) < heap.top()) {
      heap.pop();
      heap.emplace(dist2, index);
    }
  }
};

KnnIndex::KnnIndex(const Eigen::MatrixXd& points, int leaf_capacity)
    : points_(points), leaf_capacity_(std::max(1, leaf_capacity)) {
  if (points_.rows() == 0) throw std::invalid_argument("KnnIndex: empty point set");
  if (!points_.allFinite()) throw std::invalid_argument("KnnIndex: non-finite point");
  order_.resize(static_cast<size_t>(points_.rows()));
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(static_cast<size_t>(2 * points_.rows() / leaf_capacity_ + 2));
  root_ = build(0, static_cast<int>(points_.rows()));
}

int KnnIndex::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  const int count = end - begin;
  if (count > leaf_capacity_) {
    // split along the widest extent; degenerate extents fall back to a leaf
    int dim = -1;
    double best_extent = 0.0;
    for (long j = 0; j < points_.cols(); ++j) {
      double lo = points_(order_[static_cast<size_t>(begin)], j);
      double hi = lo;
      for (int i = begin + 1; i < end; ++i) {
        double v = points_(order_[static_cast<size_t>(i)], j);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_extent) {
        best_extent = hi - lo;
        dim = static_cast<int>(j);
      }
    }
    if (dim >= 0) {
      const int mid = begin + count / 2;
      auto cmp = [&](int a, int b) {
        double va = points_(a, dim);
        double vb = points_(b, dim);
        return va < vb || (va == vb && a < b);
      };
      std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, cmp);
      node.split_dim = dim;
      node.split_value = points_(order_[static_cast<size_t>(mid)], dim);
      const int self = static_cast<int>(nodes_.size());
      nodes_.push_back(node);
      int left = build(begin, mid);
      int right = build(mid, end);
      nodes_[static_cast<size_t>(self)].left = left;
      nodes_[static_cast<size_t>(self)].right = right;
      return self;
    }
  }
  nodes_.push_back(node);
  return static_cast<int>(nodes_.size()) - 1;
}

void KnnIndex::search(int node_id, const Eigen::VectorXd& q, SearchHeap& heap) const {
  const Node& node = nodes_[static_cast<size_t>(node_id)];
  if (node.split_dim < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      int row = order_[static_cast<size_t>(i)];
      double dist2 = (points_.row(row).transpose() - q).squaredNorm();
      heap.offer(dist2, row);
    }
    return;
  }
  const double diff = q(node.split_dim) - node.split_value;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, q, heap);
  // visit the far side on ties as well: an equally distant point there may
  // carry a smaller row index
  if (!heap.full() || diff * diff <= heap.worst()) search(far, q, heap);
}

std::vector<Neighbor> KnnIndex::query(const Eigen::VectorXd& q, int k) const {
  if (k < 1 || k > size()) throw std::invalid_argument("KnnIndex::query: k outside [1, size]");
  if (q.size() != dim()) throw std::invalid_argument("KnnIndex::query: dimension mismatch");
  if (!q.allFinite()) throw std::invalid_argument("KnnIndex::query: non-finite query");

  SearchHeap heap(static_cast<size_t>(k));
  search(root_, q, heap);

  std::vector<Neighbor> out(static_cast<size_t>(k));
  for (long i = k - 1; i >= 0; --i) {
    auto [dist2, row] = heap.heap.top();
    heap.heap.pop();
    out[static_cast<size_t>(i)] = Neighbor{row, std::sqrt(dist2)};
  }
  return out;
}

}  // namespace ddgroup
