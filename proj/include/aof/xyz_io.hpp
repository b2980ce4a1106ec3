#pragma once

#include "aof/pointcloud.hpp"

#include <filesystem>

namespace aof {

/// Reads whitespace-separated "x y z" lines. Lines starting with '#' and
/// blank lines are skipped.
PointCloud load_xyz(const std::filesystem::path& path);

/// Writes one "x y z" line per point with 17 significant digits.
void save_xyz(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace aof
