#pragma once

#include "aof/pointcloud.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace aof {

enum class Split { Train, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// Labeled clouds, each tagged with the split it belongs to.
struct LabeledDataset {
  std::vector<PointCloud> clouds;
  std::vector<Split> splits;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return clouds.size(); }
  int num_classes() const noexcept { return static_cast<int>(class_names.size()); }

  /// Clouds of one split, in dataset order.
  LabeledDataset subset(Split split) const;

  /// Checks that every cloud is labeled with a known class and that every
  /// class appears in the train split (when the dataset has one).
  void validate() const;
};

/// Default cloud size for desk-scale experiments.
inline constexpr Eigen::Index kDefaultPoints = 256;

/// Names of the synthetic shape classes, in label order.
const std::vector<std::string>& shape_class_names();

/// Raw surface sample of one synthetic primitive before rotation, scaling,
/// jitter and normalization. Sphere samples lie on the unit sphere.
Points sample_primitive(int shape_class, Eigen::Index n_points, std::uint64_t seed);

/// Synthetic dataset of sphere, cube, cylinder, cone and torus surfaces.
///
/// Every instance is a uniform surface sample, rotated about the z axis by a
/// random angle, scaled by a per-axis factor in [0.8, 1.2], jittered with
/// N(0, 0.005^2) and normalized.
/// The first 80% of each class (rounded to nearest) is train, the rest test.
/// `n_classes` selects a prefix of the five shapes.
LabeledDataset generate_shape_dataset(int n_per_class, Eigen::Index n_points, std::uint64_t seed,
                                      int n_classes = 5);

/// Writes `<dir>/<split>/<name>.xyz` for every cloud and `<dir>/manifest.csv`
/// with header `path,label,split` (paths relative to `dir`).
void write_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir);

/// Reads a manifest written by write_dataset (or by hand). Class names are
/// taken from `classes.txt` next to the manifest when present.
LabeledDataset read_manifest(const std::filesystem::path& manifest);

/// Stable per-item seed derived from a run seed and an index (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace aof
