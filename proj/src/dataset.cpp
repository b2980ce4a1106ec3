#include "aof/dataset.hpp"

#include "aof/error.hpp"
#include "aof/xyz_io.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace aof {

std::string_view to_string(Split split) { return split == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  throw InvalidArgument("unknown split '" + std::string(text) + "'");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

LabeledDataset LabeledDataset::subset(Split split) const {
  LabeledDataset out;
  out.class_names = class_names;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    if (splits[i] == split) {
      out.clouds.push_back(clouds[i]);
      out.splits.push_back(split);
    }
  }
  return out;
}

void LabeledDataset::validate() const {
  if (splits.size() != clouds.size()) throw ShapeError("dataset split tags do not match cloud count");
  const int c = num_classes();
  std::vector<bool> in_train(static_cast<std::size_t>(c), false);
  bool has_train = false;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const auto& label = clouds[i].label;
    if (!label || *label < 0 || *label >= c) {
      throw InvalidArgument("cloud '" + clouds[i].name + "' has a missing or out-of-range label");
    }
    if (splits[i] == Split::Train) {
      has_train = true;
      in_train[static_cast<std::size_t>(*label)] = true;
    }
  }
  if (!has_train) return;
  for (int k = 0; k < c; ++k) {
    if (!in_train[static_cast<std::size_t>(k)]) {
      throw InvalidArgument("class '" + class_names[static_cast<std::size_t>(k)] + "' is missing from the train split");
    }
  }
}

const std::vector<std::string>& shape_class_names() {
  static const std::vector<std::string> names{"sphere", "cube", "cylinder", "cone", "torus"};
  return names;
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTorusMajor = 1.0;
constexpr double kTorusMinor = 0.35;

Eigen::RowVector3d sphere_point(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::RowVector3d p;
  do {
    p << g(rng), g(rng), g(rng);
  } while (p.squaredNorm() < 1e-24);
  return p.normalized();
}

// Surface of [-1, 1]^3; the six faces have equal area.
Eigen::RowVector3d cube_point(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> face(0, 5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int f = face(rng);
  const int axis = f / 2;
  Eigen::RowVector3d p;
  p(axis) = (f % 2 == 0) ? -1.0 : 1.0;
  p((axis + 1) % 3) = u(rng);
  p((axis + 2) % 3) = u(rng);
  return p;
}

Eigen::RowVector3d disk_point(std::mt19937_64& rng, double z) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = std::sqrt(u(rng));
  const double t = 2.0 * kPi * u(rng);
  return {r * std::cos(t), r * std::sin(t), z};
}

// Radius 1, z in [-1, 1], with both caps.
Eigen::RowVector3d cylinder_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lateral = 4.0 * kPi, caps = 2.0 * kPi;
  if (u(rng) * (lateral + caps) < lateral) {
    const double t = 2.0 * kPi * u(rng);
    return {std::cos(t), std::sin(t), 2.0 * u(rng) - 1.0};
  }
  return disk_point(rng, u(rng) < 0.5 ? -1.0 : 1.0);
}

// Apex at z = 1, unit-radius base at z = -1, with the base disk.
Eigen::RowVector3d cone_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lateral = kPi * std::sqrt(5.0), base = kPi;
  if (u(rng) * (lateral + base) < lateral) {
    const double s = std::sqrt(u(rng));  // fraction of the way from apex to base
    const double t = 2.0 * kPi * u(rng);
    return {s * std::cos(t), s * std::sin(t), 1.0 - 2.0 * s};
  }
  return disk_point(rng, -1.0);
}

// Area element is proportional to R + r cos(v); rejection-sample v.
Eigen::RowVector3d torus_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v = 0.0;
  do {
    v = 2.0 * kPi * u(rng);
  } while (u(rng) * (kTorusMajor + kTorusMinor) > kTorusMajor + kTorusMinor * std::cos(v));
  const double t = 2.0 * kPi * u(rng);
  const double ring = kTorusMajor + kTorusMinor * std::cos(v);
  return {ring * std::cos(t), ring * std::sin(t), kTorusMinor * std::sin(v)};
}

// Rotation about the up (z) axis, uniform in angle.
Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  return Eigen::AngleAxisd(angle(rng), Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

}  // namespace

Points sample_primitive(int shape_class, Eigen::Index n_points, std::uint64_t seed) {
  if (n_points < 1) throw InvalidArgument("n_points must be positive");
  std::mt19937_64 rng(seed);
  Points p(n_points, 3);
  for (Eigen::Index i = 0; i < n_points; ++i) {
    switch (shape_class) {
      case 0: p.row(i) = sphere_point(rng); break;
      case 1: p.row(i) = cube_point(rng); break;
      case 2: p.row(i) = cylinder_point(rng); break;
      case 3: p.row(i) = cone_point(rng); break;
      case 4: p.row(i) = torus_point(rng); break;
      default: throw InvalidArgument("unknown shape class " + std::to_string(shape_class));
    }
  }
  return p;
}

LabeledDataset generate_shape_dataset(int n_per_class, Eigen::Index n_points, std::uint64_t seed, int n_classes) {
  if (n_per_class < 1) throw InvalidArgument("n_per_class must be at least 1");
  if (n_points < 8) throw InvalidArgument("n_points must be at least 8");
  if (n_classes < 1 || n_classes > 5) throw InvalidArgument("n_classes must be in [1, 5]");

  LabeledDataset ds;
  ds.class_names.assign(shape_class_names().begin(), shape_class_names().begin() + n_classes);
  const int n_train = std::max(1, (8 * n_per_class + 5) / 10);

  for (int c = 0; c < n_classes; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      const std::uint64_t instance_seed = derive_seed(seed, static_cast<std::uint64_t>(c * n_per_class + i));
      std::mt19937_64 rng(instance_seed);
      Points p = sample_primitive(c, n_points, rng());

      const Eigen::Matrix3d rot = random_rotation(rng);
      std::uniform_real_distribution<double> scale(0.8, 1.2);
      const Eigen::RowVector3d s(scale(rng), scale(rng), scale(rng));
      std::normal_distribution<double> jitter(0.0, 0.005);
      for (Eigen::Index r = 0; r < p.rows(); ++r) {
        Eigen::RowVector3d q = (rot * p.row(r).transpose()).transpose();
        q = q.cwiseProduct(s);
        for (int a = 0; a < 3; ++a) q(a) += jitter(rng);
        p.row(r) = q;
      }

      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04d", ds.class_names[static_cast<std::size_t>(c)].c_str(), i);
      ds.clouds.push_back(normalize(PointCloud(std::move(p), c, name)));
      ds.splits.push_back(i < n_train ? Split::Train : Split::Test);
    }
  }
  return ds;
}

void write_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "train", ec);
  fs::create_directories(dir / "test", ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::ofstream manifest(dir / "manifest.csv", std::ios::binary);
  if (!manifest) throw IoError("cannot write " + (dir / "manifest.csv").string());
  manifest << "path,label,split\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& cloud = dataset.clouds[i];
    const std::string split(to_string(dataset.splits[i]));
    const std::string name = cloud.name.empty() ? "cloud_" + std::to_string(i) : cloud.name;
    const std::string rel = split + "/" + name + ".xyz";
    save_xyz(cloud, dir / rel);
    manifest << rel << ',' << (cloud.label ? std::to_string(*cloud.label) : std::string()) << ',' << split << '\n';
  }
  std::ofstream classes(dir / "classes.txt", std::ios::binary);
  for (const auto& n : dataset.class_names) classes << n << '\n';
  if (!manifest || !classes) throw IoError("failed writing dataset manifest in " + dir.string());
}

LabeledDataset read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open " + manifest.string());
  const auto root = manifest.parent_path();

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty manifest " + manifest.string(), 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "path,label,split") throw ParseError("manifest header must be 'path,label,split'", 1);

  LabeledDataset ds;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw ParseError("expected 3 comma-separated fields", line_no);
    const std::string rel = line.substr(0, c1);
    const std::string label_text = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string split_text = line.substr(c2 + 1);

    PointCloud cloud = load_xyz(root / rel);
    if (!label_text.empty()) {
      std::size_t used = 0;
      int label = -1;
      try {
        label = std::stoi(label_text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != label_text.size() || label < 0) throw ParseError("invalid label '" + label_text + "'", line_no);
      cloud.label = label;
      max_label = std::max(max_label, label);
    }
    try {
      ds.splits.push_back(parse_split(split_text));
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), line_no);
    }
    ds.clouds.push_back(std::move(cloud));
  }

  std::ifstream classes(root / "classes.txt");
  for (std::string name; classes && std::getline(classes, name);) {
    if (!name.empty() && name.back() == '\r') name.pop_back();
    if (!name.empty()) ds.class_names.push_back(name);
  }
  for (int c = static_cast<int>(ds.class_names.size()); c <= max_label; ++c) {
    ds.class_names.push_back("class_" + std::to_string(c));
  }
  return ds;
}

}  // namespace aof
