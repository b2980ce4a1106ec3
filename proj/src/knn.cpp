#include "aof/knn.hpp"

#include "aof/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace aof {

std::vector<std::vector<int>> knn_indices(const Points& points, int k) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k >= n) {
    throw InvalidArgument("k must satisfy 1 <= k < N (k=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
  }
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  std::vector<double> d2(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d2[static_cast<std::size_t>(j)] = (points.row(i) - points.row(j)).squaredNorm();
    int w = 0;
    for (int j = 0; j < static_cast<int>(n); ++j) {
      if (j != i) order[static_cast<std::size_t>(w++)] = j;
    }
    auto closer = [&](int a, int b) {
      const double da = d2[static_cast<std::size_t>(a)], db = d2[static_cast<std::size_t>(b)];
      return da < db || (da == db && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
    out[static_cast<std::size_t>(i)].assign(order.begin(), order.begin() + k);
  }
  return out;
}

Eigen::MatrixXd pairwise_distances(const Points& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) d(i, j) = (points.row(i) - points.row(j)).norm();
  }
  return d;
}

}  // namespace aof
