#include "aof/dataset.hpp"
#include "aof/defense.hpp"
#include "aof/error.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace aof;
using aof::testing::random_points;

namespace {

// All-pairs reimplementation of SOR.
std::vector<Eigen::Index> sor_oracle(const Points& p, int k, double alpha) {
  const Eigen::Index n = p.rows();
  std::vector<double> stat;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> d;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) d.push_back((p.row(i) - p.row(j)).norm());
    std::sort(d.begin(), d.end());
    double s = 0;
    for (int t = 0; t < k; ++t) s += d[static_cast<std::size_t>(t)];
    stat.push_back(s / k);
  }
  double mean = 0;
  for (double s : stat) mean += s;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double s : stat) var += (s - mean) * (s - mean);
  const double thr = mean + alpha * std::sqrt(var / static_cast<double>(n));
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i)
    if (stat[static_cast<std::size_t>(i)] <= thr) kept.push_back(i);
  return kept;
}

}  // namespace

TEST_CASE("srs keep = N is the identity") {
  const PointCloud c(random_points(20, 1), 3, "x");
  const PointCloud out = srs(c, 20, 7);
  CHECK(out.points() == c.points());
  CHECK(out.label == 3);
  CHECK(out.name == "x");
}

TEST_CASE("srs keep = 1 picks an input point") {
  const Points p = random_points(20, 2);
  const PointCloud out = srs(PointCloud(p), 1, 3);
  REQUIRE(out.size() == 1);
  bool found = false;
  for (Eigen::Index i = 0; i < p.rows(); ++i) found = found || p.row(i) == out.points().row(0);
  CHECK(found);
  CHECK_THROWS_AS(srs(PointCloud(p), 0, 1), InvalidArgument);
  CHECK_THROWS_AS(srs(PointCloud(p), 21, 1), InvalidArgument);
}

TEST_CASE("srs retains every index with probability keep / N") {
  const Eigen::Index n = 256, keep = 128;
  const int trials = 10000;
  Points p(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) = Eigen::RowVector3d(static_cast<double>(i), 0, 0);
  const PointCloud c(p);
  std::vector<int> hits(static_cast<std::size_t>(n), 0);
  for (int t = 0; t < trials; ++t) {
    const PointCloud out = srs(c, keep, derive_seed(5, static_cast<std::uint64_t>(t)));
    REQUIRE(out.size() == keep);
    for (Eigen::Index r = 0; r < keep; ++r) {
      if (r > 0) CHECK(out.points()(r, 0) > out.points()(r - 1, 0));
      hits[static_cast<std::size_t>(out.points()(r, 0))]++;
    }
  }
  const double sigma = std::sqrt(trials * 0.25);
  int outside = 0;
  for (int h : hits) outside += std::abs(h - trials / 2) > 3 * sigma;
  // 3 sigma bounds: expect about 0.3% of indices outside by chance
  CHECK(outside <= 4);
}

TEST_CASE("sor keeps symmetric vertex sets intact") {
  Points cube(8, 3);
  for (int i = 0; i < 8; ++i) cube.row(i) = Eigen::RowVector3d(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1);
  CHECK(sor(PointCloud(cube), 2, 1.1).size() == 8);
  CHECK(sor(PointCloud(cube), 2, 0.0).size() == 8);
}

TEST_CASE("sor removes an extreme outlier") {
  Points p = sample_primitive(0, 100, 3);
  p.conservativeResize(101, 3);
  p.row(100) = Eigen::RowVector3d(100, 0, 0);
  const PointCloud out = sor(PointCloud(p), 2, 1.1);
  CHECK(out.size() == 100);
  CHECK(out.points().rowwise().norm().maxCoeff() <= 1.0 + 1e-9);
}

TEST_CASE("sor matches a brute-force oracle") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Points p = random_points(64, 40 + s);
    const PointCloud out = sor(PointCloud(p), 2, 1.1);
    const auto kept = sor_oracle(p, 2, 1.1);
    REQUIRE(out.size() == static_cast<Eigen::Index>(kept.size()));
    for (std::size_t r = 0; r < kept.size(); ++r) CHECK(out.points().row(static_cast<Eigen::Index>(r)) == p.row(kept[r]));
  }
  CHECK_THROWS_AS(sor(PointCloud(random_points(3, 1)), 3, 1.1), InvalidArgument);
}
