#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ddgroup {

// Closed axis-aligned box. Empty when hi_j < lo_j in some dimension.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  long dims() const { return lo.size(); }
  bool empty() const;
  bool contains(const Eigen::VectorXd& x) const;
  // Product of side lengths over non-degenerate dimensions (hi_j > lo_j).
  // Zero for an empty box. Degenerate dimensions are skipped so that a box
  // sharing a constant coordinate with its reference keeps a meaningful
  // measure.
  double volume() const;
};

Box intersect(const Box& a, const Box& b);

// Per-dimension min/max envelope of the rows.
Box bounding_box(const Eigen::MatrixXd& points);

// Outward expansion direction, not necessarily unit length. Scaling a
// direction by w makes its face advance at speed 1/w per unit of recorded
// constraint value, so a constraint (w * e_j, a) puts the face at
// center_j + a / w.
struct Direction {
  Eigen::VectorXd u;
  std::string label;
};

struct DirectedNorm {
  double value;
  int direction;  // index of the attaining direction, earliest on ties
};

// max over the direction set of u . x, with the attaining direction.
DirectedNorm directed_inf_norm(const Eigen::VectorXd& x, const std::vector<Direction>& dirs);

// One face of a region: u . (x - center) <= value for the referenced
// direction.
struct Constraint {
  int direction;
  double value;
};

struct Region {
  Eigen::VectorXd center;
  std::vector<Direction> directions;
  std::vector<Constraint> constraints;  // in the order recorded
  Box bounds;                           // clip for directions without a constraint

  // All recorded constraints hold and x lies inside bounds.
  bool contains(const Eigen::VectorXd& x) const;
};

// Axis-aligned directions ordered x1+, x1-, x2+, x2-, ... with dimension j
// scaled so its faces advance at speeds(j); speeds must be positive.
std::vector<Direction> axis_directions(const Eigen::VectorXd& speeds);

// Expands a region outward from center. Repeatedly takes the rejected point
// with the smallest directed norm over the still-active directions (ties to
// the earlier point), records a constraint at that norm minus shrink on the
// attaining direction, deactivates the direction, and drops every rejected
// point at or beyond the new face. Stops when the rejected set or the
// direction set is exhausted; leftover directions are clipped at bounds by
// box_of. Every rejected point ends up violating at least one recorded
// constraint.
Region grow_box(const Eigen::VectorXd& center, const Eigen::MatrixXd& rejected,
                const std::vector<Direction>& dirs, double shrink, const Box& bounds);

// Interval form of a region whose directions are axis-aligned, clipped to
// the region bounds.
Box box_of(const Region& region);

}  // namespace ddgroup
