#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "aknn/rng.hpp"
#include "aknn/spatial_index.hpp"
#include "linear_scan.hpp"

using namespace aknn;

namespace {

PointSet line(std::vector<double> xs) { return PointSet(std::move(xs), 1); }

PointSet random_points(std::mt19937_64& rng, std::size_t n, std::size_t d, bool lattice) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> g(-3, 3);
  std::vector<double> c(n * d);
  for (double& v : c) v = lattice ? g(rng) : u(rng);
  return PointSet(std::move(c), d);
}

}  // namespace

TEST(SpatialIndex, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(SpatialIndex(PointSet(2)), Error);
  try {
    SpatialIndex(PointSet(std::vector<double>{}, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty training set");
  }
  try {
    SpatialIndex(line({0.0, NAN}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "invalid coordinate");
  }
  EXPECT_THROW(SpatialIndex(line({INFINITY})), Error);
}

TEST(SpatialIndex, SinglePoint) {
  const SpatialIndex idx(line({2.5}));
  EXPECT_EQ(idx.size(), 1u);
  const double q[] = {0.0};
  const auto nb = idx.knn(q, 5);
  ASSERT_EQ(nb.size(), 1u);
  EXPECT_DOUBLE_EQ(nb.distances[0], 2.5);
}

TEST(SpatialIndex, HandExamples) {
  const SpatialIndex idx(line({0.0, 1.0, 3.0}));
  const double q04[] = {0.4};
  const auto nb = idx.knn(q04, 2);
  EXPECT_EQ(nb.indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_DOUBLE_EQ(nb.distances[0], 0.4);
  EXPECT_DOUBLE_EQ(nb.distances[1], 0.6);

  const double q0[] = {0.0};
  EXPECT_EQ(idx.count_within(q0, 1.0), 2u);  // closed ball
  EXPECT_EQ(idx.count_within(q0, 0.5), 1u);
  EXPECT_EQ(idx.count_within(q04, 0.3), 0u);
  EXPECT_EQ(idx.count_within(q0, 100.0), 3u);
  EXPECT_DOUBLE_EQ(idx.kth_distance(q0, 3), 3.0);
  EXPECT_DOUBLE_EQ(idx.kth_distance(q0, 1), 0.0);

  const double q1[] = {1.0};
  const auto self = idx.knn(q1, 1);
  EXPECT_EQ(self.indices[0], 1u);
  EXPECT_EQ(self.distances[0], 0.0);

  const auto all = idx.knn(q04, 3);
  EXPECT_EQ(all.indices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(idx.knn(q04, 50).size(), 3u);  // clamped
}

TEST(SpatialIndex, ErrorsOnBadQueries) {
  const SpatialIndex idx(line({0.0, 1.0}));
  const double q[] = {0.0};
  const double q2[] = {0.0, 0.0};
  EXPECT_THROW(idx.knn(q, 0), Error);
  EXPECT_THROW(idx.count_within(q, 0.0), Error);
  EXPECT_THROW(idx.count_within(q, -1.0), Error);
  EXPECT_THROW(idx.knn(q2, 1), Error);
}

TEST(SpatialIndex, DuplicatesAreAllRetrievable) {
  const SpatialIndex idx(PointSet({1.0, 1.0, 1.0, 1.0, 0.0, 0.0}, 2));
  const double q[] = {1.0, 1.0};
  const auto nb = idx.knn(q, 2);
  EXPECT_EQ(nb.indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(nb.distances, (std::vector<double>{0.0, 0.0}));
}

TEST(SpatialIndex, TiesBrokenByIndex) {
  // Equidistant points on both sides; the lower index comes first.
  const SpatialIndex idx(line({1.0, -1.0, 2.0, -2.0, 1.0}));
  const double q[] = {0.0};
  const auto nb = idx.knn(q, 4);
  EXPECT_EQ(nb.indices, (std::vector<std::size_t>{0, 1, 4, 2}));
}

TEST(SpatialIndex, MatchesLinearScan200x3) {
  std::mt19937_64 rng(42);
  const PointSet pts = random_points(rng, 200, 3, false);
  const SpatialIndex idx(pts, Norm::Euclidean);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int t = 0; t < 100; ++t) {
    const double q[] = {u(rng), u(rng), u(rng)};
    for (std::size_t k : {1u, 7u, 50u, 200u}) {
      const auto a = idx.knn(q, k);
      const auto b = oracle::knn(pts, Norm::Euclidean, q, k);
      ASSERT_EQ(a.indices, b.indices);
      ASSERT_EQ(a.distances, b.distances);
    }
  }
}

// Random instances, both norms, lattice points to provoke exact ties.
TEST(SpatialIndex, RandomInstancesMatchOracle) {
  std::mt19937_64 rng(7);
  for (int inst = 0; inst < 60; ++inst) {
    const std::size_t n = 1 + rng() % 500;
    const std::size_t d = 1 + rng() % 5;
    const bool lattice = inst % 3 == 0;
    const Norm norm = inst % 2 ? Norm::Max : Norm::Euclidean;
    const PointSet pts = random_points(rng, n, d, lattice);
    const SpatialIndex idx(pts, norm);
    for (int t = 0; t < 10; ++t) {
      std::vector<double> q(d);
      const bool on_point = t % 4 == 0;
      for (std::size_t i = 0; i < d; ++i)
        q[i] = on_point ? pts[rng() % n][i] : std::uniform_real_distribution<double>(-3, 3)(rng);
      const std::size_t k = 1 + rng() % (n + 3);
      const auto a = idx.knn(q, k);
      const auto b = oracle::knn(pts, norm, q, k);
      ASSERT_EQ(a.indices, b.indices) << "instance " << inst;
      ASSERT_EQ(a.distances, b.distances);
      ASSERT_EQ(idx.kth_distance(q, k), oracle::kth_distance(pts, norm, q, k));
      // Radii exactly at a neighbor distance exercise the closed-ball rule.
      for (double r : {b.distances.back(), b.distances.front() + 0.37, 0.5, 1.0 * (1 + rng() % 4)}) {
        if (!(r > 0.0)) continue;
        ASSERT_EQ(idx.count_within(q, r), oracle::count_within(pts, norm, q, r));
      }
    }
  }
}

TEST(SpatialIndex, CountMonotoneAndCoversKthDistance) {
  std::mt19937_64 rng(3);
  const PointSet pts = random_points(rng, 300, 2, false);
  const SpatialIndex idx(pts);
  const double q[] = {0.1, -0.2};
  std::size_t prev = 0;
  for (double r = 0.05; r < 6.0; r += 0.05) {
    const std::size_t c = idx.count_within(q, r);
    EXPECT_GE(c, prev);
    prev = c;
  }
  double prev_d = 0.0;
  for (std::size_t k = 1; k <= 300; k += 7) {
    const double dk = idx.kth_distance(q, k);
    EXPECT_GE(dk, prev_d);
    prev_d = dk;
    if (dk > 0.0) EXPECT_GE(idx.count_within(q, dk), k);
  }
}

TEST(Norm, MetricAxioms) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  for (Norm norm : {Norm::Euclidean, Norm::Max}) {
    for (int t = 0; t < 200; ++t) {
      double a[3], b[3], c[3];
      for (int i = 0; i < 3; ++i) a[i] = z(rng), b[i] = z(rng), c[i] = z(rng);
      EXPECT_GE(distance(norm, a, b), 0.0);
      EXPECT_EQ(distance(norm, a, a), 0.0);
      EXPECT_EQ(distance(norm, a, b), distance(norm, b, a));
      EXPECT_LE(distance(norm, a, c), distance(norm, a, b) + distance(norm, b, c) + 1e-12);
    }
  }
  EXPECT_EQ(parse_norm("linf"), Norm::Max);
  EXPECT_THROW(parse_norm("l1"), Error);
}
