#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddgroup/region.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace ddgroup;

namespace {

Box cube(long d, double lo, double hi) {
  Box b;
  b.lo = Eigen::VectorXd::Constant(d, lo);
  b.hi = Eigen::VectorXd::Constant(d, hi);
  return b;
}

// Oracle for grow_box + box_of restricted to axis-aligned directions: a
// time-stepped simulation in face-position space. All faces start at the
// center and move outward by eps * speed per step. When the box first covers
// a rejected point, the point among those covered this step with the smallest
// exact collision time (ties to the earlier row) freezes the active face that
// reached it last (ties to the earlier face id, + before - and dimension
// order, matching the direction ordering). The face freezes at the point's
// coordinate pulled back by shrink * speed; points at or beyond it drop out.
// Left-over moving faces and frozen faces are clipped at the bounds.
Box eps_grow_oracle(const Eigen::VectorXd& center, const Eigen::MatrixXd& pts,
                    const Eigen::VectorXd& speeds, double shrink, const Box& bounds,
                    double eps) {
  const long d = center.size();
  Eigen::VectorXd hi = center;
  Eigen::VectorXd lo = center;
  std::vector<bool> moving(static_cast<size_t>(2 * d), true);  // face id 2j: xj+, 2j+1: xj-
  std::vector<int> alive;
  for (long i = 0; i < pts.rows(); ++i) alive.push_back(static_cast<int>(i));
  long moving_count = 2 * d;

  auto needed_face_time = [&](int row, int* face_out) {
    // largest cover time over this point's still-moving faces
    double best = -std::numeric_limits<double>::infinity();
    int face = -1;
    for (long j = 0; j < d; ++j) {
      const double gap = pts(row, j) - center(j);
      if (gap >= 0.0 && moving[static_cast<size_t>(2 * j)]) {
        const double t = gap / speeds(j);
        if (t > best) {
          best = t;
          face = static_cast<int>(2 * j);
        }
      } else if (gap < 0.0 && moving[static_cast<size_t>(2 * j + 1)]) {
        const double t = -gap / speeds(j);
        if (t > best) {
          best = t;
          face = static_cast<int>(2 * j + 1);
        }
      }
    }
    *face_out = face;
    return best;
  };

  while (!alive.empty() && moving_count > 0) {
    for (long j = 0; j < d; ++j) {
      if (moving[static_cast<size_t>(2 * j)]) hi(j) += eps * speeds(j);
      if (moving[static_cast<size_t>(2 * j + 1)]) lo(j) -= eps * speeds(j);
    }

    int hit = -1;
    int hit_face = -1;
    double hit_time = std::numeric_limits<double>::infinity();
    for (int row : alive) {
      bool covered = true;
      for (long j = 0; j < d; ++j)
        if (pts(row, j) < lo(j) || pts(row, j) > hi(j)) {
          covered = false;
          break;
        }
      if (!covered) continue;
      int face = -1;
      const double t = needed_face_time(row, &face);
      REQUIRE(face >= 0);
      if (t < hit_time) {
        hit_time = t;
        hit = row;
        hit_face = face;
      }
    }
    if (hit < 0) continue;

    const long j = hit_face / 2;
    if (hit_face % 2 == 0) {
      hi(j) = pts(hit, j) - shrink * speeds(j);
      moving[static_cast<size_t>(hit_face)] = false;
      std::vector<int> kept;
      for (int row : alive)
        if (pts(row, j) < hi(j)) kept.push_back(row);
      alive.swap(kept);
    } else {
      lo(j) = pts(hit, j) + shrink * speeds(j);
      moving[static_cast<size_t>(hit_face)] = false;
      std::vector<int> kept;
      for (int row : alive)
        if (pts(row, j) > lo(j)) kept.push_back(row);
      alive.swap(kept);
    }
    --moving_count;
  }

  Box out;
  out.lo = lo.cwiseMax(bounds.lo);
  out.hi = hi.cwiseMin(bounds.hi);
  for (long j = 0; j < d; ++j) {
    if (moving[static_cast<size_t>(2 * j)]) out.hi(j) = bounds.hi(j);
    if (moving[static_cast<size_t>(2 * j + 1)]) out.lo(j) = bounds.lo(j);
  }
  return out;
}

}  // namespace

TEST_CASE("box basics") {
  Box b = cube(2, 0.0, 2.0);
  b.hi(1) = 3.0;
  CHECK(b.volume() == doctest::Approx(6.0));
  Eigen::Vector2d inside(1.0, 2.9), edge(0.0, 3.0), outside(2.1, 1.0);
  CHECK(b.contains(inside));
  CHECK(b.contains(edge));
  CHECK_FALSE(b.contains(outside));
  CHECK_FALSE(b.empty());
  CHECK_THROWS_AS(b.contains(Eigen::VectorXd::Zero(3)), std::invalid_argument);

  Box flipped = b;
  flipped.hi(0) = -1.0;
  CHECK(flipped.empty());
  CHECK(flipped.volume() == 0.0);
  CHECK(Box{}.empty());

  // degenerate dimensions are skipped by volume, not zeroed
  Box thin = cube(2, 0.0, 2.0);
  thin.lo(1) = thin.hi(1) = 5.0;
  CHECK(thin.volume() == doctest::Approx(2.0));
  Box point = cube(2, 5.0, 5.0);
  CHECK(point.volume() == doctest::Approx(1.0));
  CHECK(point.contains(Eigen::Vector2d(5.0, 5.0)));
}

TEST_CASE("intersect and bounding_box") {
  Box a = cube(2, 0.0, 4.0);
  Box b = cube(2, 3.0, 6.0);
  Box both = intersect(a, b);
  CHECK(both.lo(0) == 3.0);
  CHECK(both.hi(0) == 4.0);
  CHECK_FALSE(both.empty());

  Box far = cube(2, 10.0, 11.0);
  CHECK(intersect(a, far).empty());
  CHECK_THROWS_AS(intersect(a, cube(3, 0.0, 1.0)), std::invalid_argument);

  Eigen::MatrixXd pts(3, 2);
  pts << 1, -4, -2, 5, 0, 0;
  Box env = bounding_box(pts);
  CHECK(env.lo(0) == -2.0);
  CHECK(env.hi(0) == 1.0);
  CHECK(env.lo(1) == -4.0);
  CHECK(env.hi(1) == 5.0);
  CHECK_THROWS_AS(bounding_box(Eigen::MatrixXd(0, 2)), std::invalid_argument);
}

TEST_CASE("axis directions encode speeds") {
  Eigen::Vector2d speeds(2.0, 0.5);
  auto dirs = axis_directions(speeds);
  REQUIRE(dirs.size() == 4);
  CHECK(dirs[0].label == "x1+");
  CHECK(dirs[1].label == "x1-");
  CHECK(dirs[2].label == "x2+");
  CHECK(dirs[3].label == "x2-");
  CHECK(dirs[0].u(0) == doctest::Approx(0.5));
  CHECK(dirs[1].u(0) == doctest::Approx(-0.5));
  CHECK(dirs[2].u(1) == doctest::Approx(2.0));
  CHECK(dirs[3].u(1) == doctest::Approx(-2.0));
  CHECK(dirs[0].u(1) == 0.0);
  CHECK_THROWS_AS(axis_directions(Eigen::Vector2d(1.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(axis_directions(Eigen::Vector2d(1.0, -2.0)), std::invalid_argument);
}

TEST_CASE("directed norm with unit speeds is the max-abs coordinate") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(-10.0, 10.0);
  for (int d : {1, 2, 5}) {
    auto dirs = axis_directions(Eigen::VectorXd::Ones(d));
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x(j) = unif(gen);
      auto got = directed_inf_norm(x, dirs);
      long arg = 0;
      x.cwiseAbs().maxCoeff(&arg);
      CHECK(got.value == doctest::Approx(x.cwiseAbs().maxCoeff()));
      CHECK(got.direction == 2 * arg + (x(arg) > 0 ? 0 : 1));
    }
  }
}

TEST_CASE("directed norm tie goes to the earliest direction") {
  auto dirs = axis_directions(Eigen::VectorXd::Ones(2));
  auto got = directed_inf_norm(Eigen::Vector2d(3.0, -3.0), dirs);
  CHECK(got.value == 3.0);
  CHECK(got.direction == 0);  // x1+ beats x2- on the tie

  // speeds reweight the comparison
  auto scaled = axis_directions(Eigen::Vector2d(2.0, 0.5));
  auto s = directed_inf_norm(Eigen::Vector2d(4.0, 1.1), scaled);
  CHECK(s.value == doctest::Approx(2.2));
  CHECK(s.direction == 2);

  CHECK_THROWS_AS(directed_inf_norm(Eigen::Vector2d(1, 1), {}), std::invalid_argument);
  CHECK_THROWS_AS(directed_inf_norm(Eigen::VectorXd::Zero(3), dirs), std::invalid_argument);
}

TEST_CASE("growth order and face placement on a worked example") {
  Eigen::Vector2d center(0.0, 0.0);
  auto dirs = axis_directions(Eigen::VectorXd::Ones(2));
  Eigen::MatrixXd rejected(4, 2);
  rejected << 1, 0.2, -0.5, 3, 0.1, -2, 4, -4;
  Box bounds = cube(2, -10.0, 10.0);

  Region region = grow_box(center, rejected, dirs, 0.0, bounds);
  REQUIRE(region.constraints.size() == 3);
  // first collision: row 0 on x1+ at 1 (row 3 ties the direction but is later)
  CHECK(region.constraints[0].direction == 0);
  CHECK(region.constraints[0].value == doctest::Approx(1.0));
  // rows 0 and 3 drop; row 2 collides on x2- at 2
  CHECK(region.constraints[1].direction == 3);
  CHECK(region.constraints[1].value == doctest::Approx(2.0));
  // row 1 collides on x2+ at 3; x1- never collides
  CHECK(region.constraints[2].direction == 2);
  CHECK(region.constraints[2].value == doctest::Approx(3.0));

  Box box = box_of(region);
  CHECK(box.lo(0) == doctest::Approx(-10.0));
  CHECK(box.hi(0) == doctest::Approx(1.0));
  CHECK(box.lo(1) == doctest::Approx(-2.0));
  CHECK(box.hi(1) == doctest::Approx(3.0));

  CHECK(region.contains(Eigen::Vector2d(0.5, 0.5)));
  CHECK(region.contains(Eigen::Vector2d(-9.0, 2.9)));
  CHECK_FALSE(region.contains(Eigen::Vector2d(1.5, 0.0)));
  CHECK_FALSE(region.contains(Eigen::Vector2d(0.0, -2.5)));
  CHECK_FALSE(region.contains(Eigen::Vector2d(-10.5, 0.0)));  // outside bounds

  // a positive shrink pulls every face in by exactly that much here, since
  // the collision order is unchanged
  Region tighter = grow_box(center, rejected, dirs, 0.25, bounds);
  Box tbox = box_of(tighter);
  CHECK(tbox.hi(0) == doctest::Approx(0.75));
  CHECK(tbox.lo(1) == doctest::Approx(-1.75));
  CHECK(tbox.hi(1) == doctest::Approx(2.75));
  CHECK(tbox.lo(0) == doctest::Approx(-10.0));
  for (long i = 0; i < rejected.rows(); ++i)
    CHECK_FALSE(tighter.contains(rejected.row(i).transpose()));
}

TEST_CASE("anisotropic speeds place the face at the colliding coordinate") {
  Eigen::Vector2d center(0.0, 0.0);
  auto dirs = axis_directions(Eigen::Vector2d(2.0, 0.5));
  Eigen::MatrixXd rejected(1, 2);
  rejected << 4, 1.1;
  Region region = grow_box(center, rejected, dirs, 0.0, cube(2, -10.0, 10.0));
  REQUIRE(region.constraints.size() == 1);
  CHECK(region.constraints[0].direction == 2);
  CHECK(region.constraints[0].value == doctest::Approx(2.2));
  Box box = box_of(region);
  CHECK(box.hi(1) == doctest::Approx(1.1));
  CHECK(box.hi(0) == doctest::Approx(10.0));
  CHECK(box.lo(0) == doctest::Approx(-10.0));
  CHECK(box.lo(1) == doctest::Approx(-10.0));
}

TEST_CASE("no rejected points leaves the bounds") {
  Eigen::Vector3d center(0.1, -0.2, 0.0);
  auto dirs = axis_directions(Eigen::VectorXd::Ones(3));
  Box bounds = cube(3, -2.0, 2.0);
  Region region = grow_box(center, Eigen::MatrixXd(0, 3), dirs, 0.05, bounds);
  CHECK(region.constraints.empty());
  Box box = box_of(region);
  for (long j = 0; j < 3; ++j) {
    CHECK(box.lo(j) == bounds.lo(j));
    CHECK(box.hi(j) == bounds.hi(j));
  }
}

TEST_CASE("grow_box input validation") {
  Eigen::Vector2d center(0.0, 0.0);
  auto dirs = axis_directions(Eigen::VectorXd::Ones(2));
  Box bounds = cube(2, -1.0, 1.0);
  CHECK_THROWS_AS(grow_box(center, Eigen::MatrixXd(0, 2), {}, 0.0, bounds),
                  std::invalid_argument);
  CHECK_THROWS_AS(grow_box(center, Eigen::MatrixXd(0, 2), dirs, -0.1, bounds),
                  std::invalid_argument);
  CHECK_THROWS_AS(grow_box(center, Eigen::MatrixXd(0, 2), dirs, 0.0, cube(3, -1.0, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(grow_box(center, Eigen::MatrixXd::Zero(2, 3), dirs, 0.0, bounds),
                  std::invalid_argument);
  CHECK_THROWS_AS(grow_box(Eigen::VectorXd::Zero(3), Eigen::MatrixXd(0, 3), dirs, 0.0,
                           cube(3, -1.0, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("box_of rejects directions that are not axis-aligned") {
  Region region;
  region.center = Eigen::Vector2d(0.0, 0.0);
  region.bounds = cube(2, -1.0, 1.0);
  region.directions = {Direction{Eigen::Vector2d(1.0, 1.0), "diag"}};
  CHECK_THROWS_AS(box_of(region), std::invalid_argument);
  region.directions = {Direction{Eigen::Vector2d(0.0, 0.0), "zero"}};
  CHECK_THROWS_AS(box_of(region), std::invalid_argument);
}

TEST_CASE("matches the stepped-expansion oracle on random instances") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> center_coord(-0.5, 0.5);
  std::uniform_real_distribution<double> speed(0.5, 2.0);
  const double shrinks[] = {0.0, 0.01, 0.1};

  for (int trial = 0; trial < 60; ++trial) {
    const long d = 1 + static_cast<long>(gen() % 3);
    const long n = 1 + static_cast<long>(gen() % 20);
    Eigen::MatrixXd pts(n, d);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < d; ++j) pts(i, j) = coord(gen);
    Eigen::VectorXd center(d), speeds(d);
    for (long j = 0; j < d; ++j) {
      center(j) = center_coord(gen);
      speeds(j) = (trial % 2 == 0) ? 1.0 : speed(gen);
    }
    const double shrink = shrinks[trial % 3];
    Box bounds = cube(d, -3.0, 3.0);

    Region region = grow_box(center, pts, axis_directions(speeds), shrink, bounds);
    Box got = box_of(region);
    Box expected = eps_grow_oracle(center, pts, speeds, shrink, bounds, 1e-4);
    for (long j = 0; j < d; ++j) {
      CHECK(std::abs(got.lo(j) - expected.lo(j)) <= 1e-4);
      CHECK(std::abs(got.hi(j) - expected.hi(j)) <= 1e-4);
    }

    // every rejected point is shut out when shrink is positive
    if (shrink > 0.0)
      for (long i = 0; i < n; ++i) CHECK_FALSE(region.contains(pts.row(i).transpose()));

    // the region and its interval form agree pointwise
    std::uniform_real_distribution<double> probe(-3.5, 3.5);
    for (int p = 0; p < 50; ++p) {
      Eigen::VectorXd x(d);
      for (long j = 0; j < d; ++j) x(j) = probe(gen);
      CHECK(region.contains(x) == got.contains(x));
    }
  }
}

TEST_CASE("speeds act as a coordinate change") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> speed(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const long d = 1 + static_cast<long>(gen() % 3);
    const long n = 1 + static_cast<long>(gen() % 15);
    Eigen::MatrixXd pts(n, d);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < d; ++j) pts(i, j) = coord(gen);
    Eigen::VectorXd center = Eigen::VectorXd::Zero(d), speeds(d);
    for (long j = 0; j < d; ++j) {
      center(j) = 0.3 * coord(gen);
      speeds(j) = speed(gen);
    }
    Box bounds = cube(d, -4.0, 4.0);

    Box scaled = box_of(grow_box(center, pts, axis_directions(speeds), 0.01, bounds));

    // z = (x - center) / speeds, grown with unit speeds
    Eigen::MatrixXd z = (pts.rowwise() - center.transpose()) *
                        speeds.cwiseInverse().asDiagonal();
    Box zbounds;
    zbounds.lo = (bounds.lo - center).cwiseQuotient(speeds);
    zbounds.hi = (bounds.hi - center).cwiseQuotient(speeds);
    Box unit = box_of(grow_box(Eigen::VectorXd::Zero(d), z,
                               axis_directions(Eigen::VectorXd::Ones(d)), 0.01, zbounds));

    for (long j = 0; j < d; ++j) {
      CHECK(scaled.lo(j) == doctest::Approx(center(j) + unit.lo(j) * speeds(j)).epsilon(1e-9));
      CHECK(scaled.hi(j) == doctest::Approx(center(j) + unit.hi(j) * speeds(j)).epsilon(1e-9));
    }
  }
}
