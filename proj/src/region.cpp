#include "ddgroup/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddgroup {

bool Box::empty() const {
  for (long j = 0; j < dims(); ++j)
    if (hi(j) < lo(j)) return true;
  return dims() == 0;
}

bool Box::contains(const Eigen::VectorXd& x) const {
  if (x.size() != dims()) throw std::invalid_argument("Box::contains: dimension mismatch");
  for (long j = 0; j < dims(); ++j)
    if (x(j) < lo(j) || x(j) > hi(j)) return false;
  return true;
}

double Box::volume() const {
  if (empty()) return 0.0;
  double v = 1.0;
  for (long j = 0; j < dims(); ++j)
    if (hi(j) > lo(j)) v *= hi(j) - lo(j);
  return v;
}

Box intersect(const Box& a, const Box& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("intersect: dimension mismatch");
  Box out;
  out.lo = a.lo.cwiseMax(b.lo);
  out.hi = a.hi.cwiseMin(b.hi);
  return out;
}

Box bounding_box(const Eigen::MatrixXd& points) {
  if (points.rows() == 0) throw std::invalid_argument("bounding_box: empty point set");
  Box out;
  out.lo = points.colwise().minCoeff();
  out.hi = points.colwise().maxCoeff();
  return out;
}

DirectedNorm directed_inf_norm(const Eigen::VectorXd& x, const std::vector<Direction>& dirs) {
  if (dirs.empty()) throw std::invalid_argument("directed_inf_norm: empty direction set");
  DirectedNorm best{-std::numeric_limits<double>::infinity(), -1};
  for (size_t i = 0; i < dirs.size(); ++i) {
    if (dirs[i].u.size() != x.size())
      throw std::invalid_argument("directed_inf_norm: dimension mismatch");
    double dot = dirs[i].u.dot(x);
    if (dot > best.value) best = DirectedNorm{dot, static_cast<int>(i)};
  }
  return best;
}

bool Region::contains(const Eigen::VectorXd& x) const {
  if (!bounds.contains(x)) return false;
  for (const Constraint& c : constraints)
    if (directions[static_cast<size_t>(c.direction)].u.dot(x - center) > c.value) return false;
  return true;
}

std::vector<Direction> axis_directions(const Eigen::VectorXd& speeds) {
  std::vector<Direction> dirs;
  dirs.reserve(static_cast<size_t>(2 * speeds.size()));
  for (long j = 0; j < speeds.size(); ++j) {
    if (!(speeds(j) > 0.0)) throw std::invalid_argument("axis_directions: speeds must be positive");
    Eigen::VectorXd u = Eigen::VectorXd::Zero(speeds.size());
    u(j) = 1.0 / speeds(j);
    dirs.push_back(Direction{u, "x" + std::to_string(j + 1) + "+"});
    dirs.push_back(Direction{-u, "x" + std::to_string(j + 1) + "-"});
  }
  return dirs;
}

Region grow_box(const Eigen::VectorXd& center, const Eigen::MatrixXd& rejected,
                const std::vector<Direction>& dirs, double shrink, const Box& bounds) {
  if (dirs.empty()) throw std::invalid_argument("grow_box: empty direction set");
  if (shrink < 0.0) throw std::invalid_argument("grow_box: negative shrink");
  if (bounds.dims() != center.size()) throw std::invalid_argument("grow_box: bounds dimension mismatch");
  for (const Direction& dir : dirs)
    if (dir.u.size() != center.size()) throw std::invalid_argument("grow_box: direction dimension mismatch");
  if (rejected.rows() > 0 && rejected.cols() != center.size())
    throw std::invalid_argument("grow_box: rejected dimension mismatch");

  Region region;
  region.center = center;
  region.directions = dirs;
  region.bounds = bounds;

  std::vector<int> alive(static_cast<size_t>(rejected.rows()));
  for (size_t i = 0; i < alive.size(); ++i) alive[i] = static_cast<int>(i);
  std::vector<bool> active(dirs.size(), true);
  long active_count = static_cast<long>(dirs.size());
  Eigen::MatrixXd centered = rejected;
  centered.rowwise() -= center.transpose();

  while (!alive.empty() && active_count > 0) {
    // the next collision: minimal directed norm over active directions.
    // Rows are scanned in order with strict comparisons, so ties resolve to
    // the earlier point, then the earlier direction.
    int best_dir = -1;
    double best_value = std::numeric_limits<double>::infinity();
    for (int row : alive) {
      double value = -std::numeric_limits<double>::infinity();
      int attaining = -1;
      for (size_t u = 0; u < dirs.size(); ++u) {
        if (!active[u]) continue;
        double dot = dirs[u].u.dot(centered.row(row).transpose());
        if (dot > value) {
          value = dot;
          attaining = static_cast<int>(u);
        }
      }
      if (value < best_value) {
        best_value = value;
        best_dir = attaining;
      }
    }

    const double face = best_value - shrink;
    region.constraints.push_back(Constraint{best_dir, face});
    active[static_cast<size_t>(best_dir)] = false;
    --active_count;

    std::vector<int> kept;
    kept.reserve(alive.size());
    const Eigen::VectorXd& u = dirs[static_cast<size_t>(best_dir)].u;
    for (int row : alive)
      if (u.dot(centered.row(row).transpose()) < face) kept.push_back(row);
    alive.swap(kept);
  }
  return region;
}

Box box_of(const Region& region) {
  const long d = region.center.size();
  Box out = region.bounds;

  std::vector<double> scale(static_cast<size_t>(region.directions.size()));
  std::vector<long> axis(static_cast<size_t>(region.directions.size()));
  for (size_t i = 0; i < region.directions.size(); ++i) {
    const Eigen::VectorXd& u = region.directions[i].u;
    long nz = -1;
    for (long j = 0; j < d; ++j) {
      if (u(j) != 0.0) {
        if (nz >= 0) throw std::invalid_argument("box_of: direction is not axis-aligned");
        nz = j;
      }
    }
    if (nz < 0) throw std::invalid_argument("box_of: zero direction");
    axis[i] = nz;
    scale[i] = u(nz);
  }

  for (const Constraint& c : region.constraints) {
    const size_t i = static_cast<size_t>(c.direction);
    const long j = axis[i];
    const double w = scale[i];
    if (w > 0.0) {
      out.hi(j) = std::min(out.hi(j), region.center(j) + c.value / w);
    } else {
      out.lo(j) = std::max(out.lo(j), region.center(j) + c.value / w);
    }
  }
  return out;
}

}  // namespace ddgroup
