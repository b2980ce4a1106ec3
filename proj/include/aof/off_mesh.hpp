#pragma once

#include "aof/pointcloud.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

namespace aof {

struct TriangleMesh {
  Eigen::Matrix<double, Eigen::Dynamic, 3> vertices;
  Eigen::Matrix<int, Eigen::Dynamic, 3> triangles;
};

/// Parses an ASCII OFF mesh. Polygons with more than three vertices are
/// fan-triangulated around their first vertex.
TriangleMesh parse_off(std::istream& in);
TriangleMesh load_off(const std::filesystem::path& path);

/// Samples `n_points` points uniformly over the surface: triangles are picked
/// with probability proportional to area, then a uniform barycentric point is
/// drawn. The points are returned in mesh coordinates (not normalized).
/// `face_of_sample`, when given, receives the triangle index of every sample.
Points sample_surface(const TriangleMesh& mesh, Eigen::Index n_points, std::uint64_t seed,
                      std::vector<int>* face_of_sample = nullptr);

/// load_off + sample_surface + normalize.
PointCloud load_off_and_sample(const std::filesystem::path& path, Eigen::Index n_points,
                               std::uint64_t seed);

}  // namespace aof
