#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>

namespace aof {

/// N x 3 coordinates, one point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// A point cloud with optional class label and identifier.
///
/// Always holds at least one point and only finite coordinates; the
/// constructor enforces both. `normalized()` is set only by `normalize` and
/// guarantees centroid ~0 and max norm ~1.
class PointCloud {
 public:
  explicit PointCloud(Points points, std::optional<int> label = std::nullopt, std::string name = {});

  const Points& points() const noexcept { return points_; }
  Eigen::Index size() const noexcept { return points_.rows(); }
  bool normalized() const noexcept { return normalized_; }

  /// New cloud with the same label and name.
  PointCloud with_points(Points points) const;

  std::optional<int> label;
  std::string name;

 private:
  friend PointCloud normalize(const PointCloud& cloud);

  Points points_;
  bool normalized_ = false;
};

/// Center on the centroid and scale so the farthest point has norm 1.
/// Throws DegenerateInput when all points coincide.
PointCloud normalize(const PointCloud& cloud);

Eigen::RowVector3d centroid(const Points& points);

/// max_i |points(i, j)| over all coordinates.
double linf_norm(const Points& points);

}  // namespace aof
