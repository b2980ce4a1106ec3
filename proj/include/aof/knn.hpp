#pragma once

#include "aof/pointcloud.hpp"

#include <Eigen/Core>

#include <vector>

namespace aof {

/// Indices of the k nearest neighbors of every point (self excluded),
/// ordered by increasing distance; equal distances resolve to the lower index.
/// Brute force, O(N^2 log k).
std::vector<std::vector<int>> knn_indices(const Points& points, int k);

/// Matrix of pairwise Euclidean distances.
Eigen::MatrixXd pairwise_distances(const Points& points);

}  // namespace aof
