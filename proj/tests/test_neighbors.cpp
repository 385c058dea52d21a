#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddgroup/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace ddgroup;

namespace {

// Oracle: full scan, sort by (squared distance, index).
std::vector<Neighbor> brute_force(const Eigen::MatrixXd& points, const Eigen::VectorXd& q,
                                  int k) {
  std::vector<std::pair<double, int>> all;
  for (long i = 0; i < points.rows(); ++i)
    all.emplace_back((points.row(i).transpose() - q).squaredNorm(), static_cast<int>(i));
  std::sort(all.begin(), all.end());
  std::vector<Neighbor> out;
  for (int i = 0; i < k; ++i) out.push_back(Neighbor{all[i].second, std::sqrt(all[i].first)});
  return out;
}

Eigen::MatrixXd random_points(long n, long d, unsigned long seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  Eigen::MatrixXd points(n, d);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < d; ++j) points(i, j) = unif(gen);
  return points;
}

}  // namespace

TEST_CASE("one-dimensional example by hand") {
  Eigen::MatrixXd points(3, 1);
  points << 0, 1, 10;
  KnnIndex index(points);
  Eigen::VectorXd q(1);
  q << 0.6;
  auto got = index.query(q, 2);
  REQUIRE(got.size() == 2);
  CHECK(got[0].index == 1);
  CHECK(got[0].distance == doctest::Approx(0.4));
  CHECK(got[1].index == 0);
  CHECK(got[1].distance == doctest::Approx(0.6));
}

TEST_CASE("a point in the set is its own nearest neighbor") {
  Eigen::MatrixXd points = random_points(100, 3, 1);
  KnnIndex index(points);
  for (long i = 0; i < points.rows(); i += 7) {
    auto got = index.query(points.row(i).transpose(), 1);
    CHECK(got[0].index == static_cast<int>(i));
    CHECK(got[0].distance == 0.0);
  }
}

TEST_CASE("equal distances resolve to the smaller row index") {
  Eigen::MatrixXd points(4, 2);
  points << 1, 0, -1, 0, 0, 1, 0, -1;  // all at distance 1 from the origin
  KnnIndex index(points);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(2);
  auto got = index.query(q, 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(got[static_cast<size_t>(i)].index == i);
    CHECK(got[static_cast<size_t>(i)].distance == doctest::Approx(1.0));
  }

  // duplicated coordinates
  Eigen::MatrixXd dup(3, 1);
  dup << 2, 2, 2;
  KnnIndex dup_index(dup);
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(1);
  auto order = dup_index.query(origin, 3);
  CHECK(order[0].index == 0);
  CHECK(order[1].index == 1);
  CHECK(order[2].index == 2);
}

TEST_CASE("matches the brute-force oracle on random point sets") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 12; ++trial) {
    const long n = 50 + static_cast<long>(gen() % 1951);
    const long d = 1 + static_cast<long>(gen() % 8);
    Eigen::MatrixXd points = random_points(n, d, 1000 + trial);
    KnnIndex index(points);
    for (int k : {1, 5, static_cast<int>(n / 10)}) {
      if (k < 1) continue;
      Eigen::VectorXd q(d);
      for (long j = 0; j < d; ++j) q(j) = std::uniform_real_distribution<double>(-6, 6)(gen);
      auto got = index.query(q, k);
      auto expected = brute_force(points, q, k);
      REQUIRE(got.size() == expected.size());
      for (size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].index == expected[i].index);
        CHECK(got[i].distance == doctest::Approx(expected[i].distance).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("queries from inside the set match the oracle too") {
  Eigen::MatrixXd points = random_points(400, 2, 77);
  KnnIndex index(points);
  for (long i = 0; i < points.rows(); i += 31) {
    auto got = index.query(points.row(i).transpose(), 20);
    auto expected = brute_force(points, points.row(i).transpose(), 20);
    for (size_t j = 0; j < got.size(); ++j) CHECK(got[j].index == expected[j].index);
  }
}

TEST_CASE("degenerate point sets still work") {
  // zero extent in every dimension
  Eigen::MatrixXd same(40, 3);
  same.setConstant(1.25);
  KnnIndex index(same);
  Eigen::VectorXd q(3);
  q << 0, 0, 0;
  auto got = index.query(q, 5);
  for (int i = 0; i < 5; ++i) CHECK(got[static_cast<size_t>(i)].index == i);

  // single point
  Eigen::MatrixXd one(1, 2);
  one << 3, 4;
  KnnIndex single(one);
  auto nearest = single.query(Eigen::VectorXd::Zero(2), 1);
  CHECK(nearest[0].distance == doctest::Approx(5.0));
}

TEST_CASE("invalid queries are rejected") {
  Eigen::MatrixXd points = random_points(10, 2, 5);
  KnnIndex index(points);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(index.query(q, 0), std::invalid_argument);
  CHECK_THROWS_AS(index.query(q, 11), std::invalid_argument);
  CHECK_THROWS_AS(index.query(Eigen::VectorXd::Zero(3), 1), std::invalid_argument);
  CHECK_THROWS_AS(KnnIndex(Eigen::MatrixXd(0, 2)), std::invalid_argument);
}

TEST_CASE("small leaf capacities agree with the default") {
  Eigen::MatrixXd points = random_points(300, 4, 123);
  KnnIndex coarse(points, 64);
  KnnIndex fine(points, 1);
  Eigen::VectorXd q(4);
  q << 0.5, -0.25, 1.0, 0.0;
  auto a = coarse.query(q, 17);
  auto b = fine.query(q, 17);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].index == b[i].index);
}
