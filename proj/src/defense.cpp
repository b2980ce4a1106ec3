#include "aof/defense.hpp"

#include "aof/error.hpp"
#include "aof/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace aof {

namespace {

PointCloud gather(const PointCloud& cloud, const std::vector<Eigen::Index>& rows) {
  Points out(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = cloud.points().row(rows[r]);
  return cloud.with_points(std::move(out));
}

}  // namespace

PointCloud srs(const PointCloud& cloud, Eigen::Index keep, std::uint64_t seed) {
  const Eigen::Index n = cloud.size();
  if (keep < 1 || keep > n) throw InvalidArgument("SRS keep count must lie in [1, N]");
  if (keep == n) return cloud;

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < keep; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(keep));
  std::sort(idx.begin(), idx.end());
  return gather(cloud, idx);
}

PointCloud sor(const PointCloud& cloud, int k, double alpha) {
  const Eigen::Index n = cloud.size();
  if (k < 1 || k >= n) throw InvalidArgument("SOR needs 1 <= k < N");
  if (!(alpha >= 0.0)) throw InvalidArgument("SOR alpha must be non-negative");

  const auto neighbors = knn_indices(cloud.points(), k);
  std::vector<double> stat(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j : neighbors[static_cast<std::size_t>(i)]) sum += (cloud.points().row(i) - cloud.points().row(j)).norm();
    stat[static_cast<std::size_t>(i)] = sum / k;
  }
  const double mean = std::accumulate(stat.begin(), stat.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double s : stat) var += (s - mean) * (s - mean);
  const double sigma = std::sqrt(var / static_cast<double>(n));
  const double threshold = mean + alpha * sigma;

  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(stat[static_cast<std::size_t>(i)] > threshold)) kept.push_back(i);
  }
  return gather(cloud, kept);
}

}  // namespace aof
