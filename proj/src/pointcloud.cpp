#include "aof/pointcloud.hpp"

#include "aof/error.hpp"

namespace aof {

PointCloud::PointCloud(Points points, std::optional<int> label_, std::string name_)
    : label(label_), name(std::move(name_)), points_(std::move(points)) {
  if (points_.rows() < 1) throw InvalidArgument("point cloud must contain at least one point");
  if (!points_.allFinite()) throw InvalidArgument("point cloud contains non-finite coordinates");
}

PointCloud PointCloud::with_points(Points points) const { return PointCloud(std::move(points), label, name); }

Eigen::RowVector3d centroid(const Points& points) { return points.colwise().mean(); }

double linf_norm(const Points& points) { return points.size() == 0 ? 0.0 : points.cwiseAbs().maxCoeff(); }

PointCloud normalize(const PointCloud& cloud) {
  Points centered = cloud.points().rowwise() - centroid(cloud.points());
  const double scale = centered.rowwise().norm().maxCoeff();
  if (!(scale > 0.0)) throw DegenerateInput("cannot normalize a cloud whose points all coincide");
  centered /= scale;
  PointCloud out(std::move(centered), cloud.label, cloud.name);
  out.normalized_ = true;
  return out;
}

}  // namespace aof
