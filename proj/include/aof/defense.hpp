#pragma once

#include "aof/pointcloud.hpp"

#include <cstdint>

namespace aof {

struct DefenseConfig {
  Eigen::Index srs_keep = 0;  // 0 means ceil(N / 2)
  int sor_k = 2;
  double sor_alpha = 1.1;
};

/// Simple random sampling: keeps a uniform random subset of `keep` points,
/// in input order.
PointCloud srs(const PointCloud& cloud, Eigen::Index keep, std::uint64_t seed);

/// Statistical outlier removal: drops points whose mean distance to their k
/// nearest neighbors exceeds mu + alpha * sigma (population statistics over
/// the cloud). Keeps input order.
PointCloud sor(const PointCloud& cloud, int k, double alpha);

}  // namespace aof
