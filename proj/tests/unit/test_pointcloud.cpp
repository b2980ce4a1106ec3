#include "aof/dataset.hpp"
#include "aof/error.hpp"
#include "aof/off_mesh.hpp"
#include "aof/pointcloud.hpp"
#include "aof/xyz_io.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace aof;
using aof::testing::random_points;
using aof::testing::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kCubeOff =
    "OFF\n"
    "# unit cube, quads\n"
    "8 6 0\n"
    "-1 -1 -1\n 1 -1 -1\n 1 1 -1\n -1 1 -1\n"
    "-1 -1 1\n 1 -1 1\n 1 1 1\n -1 1 1\n"
    "4 0 3 2 1\n4 4 5 6 7\n4 0 1 5 4\n4 2 3 7 6\n4 1 2 6 5\n4 0 4 7 3\n";

}  // namespace

TEST_CASE("point cloud invariants") {
  CHECK_THROWS_AS(PointCloud(Points(0, 3)), InvalidArgument);
  Points p = Points::Zero(2, 3);
  p(1, 2) = std::nan("");
  CHECK_THROWS_AS(PointCloud{p}, InvalidArgument);
  p(1, 2) = INFINITY;
  CHECK_THROWS_AS(PointCloud{p}, InvalidArgument);
}

TEST_CASE("load_xyz parses a simple file") {
  TempDir dir;
  write_text(dir / "tri.xyz", "0 0 0\n1 0 0\n0 1 0");
  const PointCloud c = load_xyz(dir / "tri.xyz");
  REQUIRE(c.size() == 3);
  CHECK(c.points()(1, 0) == 1.0);
  CHECK(c.points()(2, 1) == 1.0);
  CHECK(c.points().row(0).isZero());
  CHECK(c.name == "tri");
}

TEST_CASE("load_xyz reports the offending line") {
  TempDir dir;
  write_text(dir / "bad.xyz", "1 2\n");
  try {
    load_xyz(dir / "bad.xyz");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  write_text(dir / "bad2.xyz", "# header\n0 0 0\n\n1 x 2\n");
  try {
    load_xyz(dir / "bad2.xyz");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  write_text(dir / "empty.xyz", "# nothing\n");
  CHECK_THROWS_AS(load_xyz(dir / "empty.xyz"), ParseError);
  CHECK_THROWS_AS(load_xyz(dir / "missing.xyz"), IoError);
}

TEST_CASE("save_xyz format and round trip") {
  TempDir dir;
  save_xyz(PointCloud(Points::Zero(1, 3)), dir / "one.xyz");
  CHECK(read_text(dir / "one.xyz") == "0 0 0\n");
  CHECK_THROWS_AS(save_xyz(PointCloud(Points::Zero(1, 3)), ""), IoError);

  const PointCloud c(random_points(64, 11, 3.0));
  save_xyz(c, dir / "r.xyz");
  const PointCloud back = load_xyz(dir / "r.xyz");
  REQUIRE(back.size() == 64);
  CHECK((back.points() - c.points()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("normalize") {
  Points p(2, 3);
  p << 1, 0, 0, 3, 0, 0;
  const PointCloud n = normalize(PointCloud(p));
  CHECK(n.normalized());
  CHECK(n.points()(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(n.points()(1, 0) == doctest::Approx(1.0).epsilon(1e-15));

  const PointCloud r = normalize(PointCloud(random_points(50, 3)));
  CHECK(centroid(r.points()).norm() <= 1e-6);
  CHECK(std::abs(r.points().rowwise().norm().maxCoeff() - 1.0) <= 1e-6);
  const PointCloud again = normalize(r);
  CHECK((again.points() - r.points()).cwiseAbs().maxCoeff() <= 1e-12);

  Points same(4, 3);
  same.rowwise() = Eigen::RowVector3d(0.5, 0.5, 0.5);
  CHECK_THROWS_AS(normalize(PointCloud(same)), DegenerateInput);
}

TEST_CASE("OFF sampling stays inside a right triangle") {
  std::istringstream in("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  const TriangleMesh mesh = parse_off(in);
  const Points s = sample_surface(mesh, 1000, 5);
  REQUIRE(s.rows() == 1000);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    CHECK(std::abs(s(i, 2)) <= 1e-9);
    CHECK(s(i, 0) >= -1e-12);
    CHECK(s(i, 1) >= -1e-12);
    CHECK(s(i, 0) + s(i, 1) <= 1.0 + 1e-12);
  }
}

TEST_CASE("OFF parse errors") {
  std::istringstream zero("OFF\n3 1 0\n0 0 0\n1 1 1\n2 2 2\n3 0 1 2\n");
  CHECK_THROWS_AS(sample_surface(parse_off(zero), 10, 1), DegenerateInput);
  std::istringstream bad_header("COFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  CHECK_THROWS_AS(parse_off(bad_header), ParseError);
  std::istringstream bad_index("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n");
  CHECK_THROWS_AS(parse_off(bad_index), ParseError);
  std::istringstream short_file("OFF\n3 1 0\n0 0 0\n1 0 0\n");
  CHECK_THROWS_AS(parse_off(short_file), ParseError);
  std::istringstream same_line("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  CHECK(parse_off(same_line).triangles.rows() == 1);
}

TEST_CASE("cube face counts follow the multinomial expectation") {
  std::istringstream in(kCubeOff);
  const TriangleMesh mesh = parse_off(in);
  REQUIRE(mesh.triangles.rows() == 12);
  const int n = 10000;
  std::vector<int> faces;
  const Points s = sample_surface(mesh, n, 99, &faces);
  std::vector<int> counts(6, 0);
  for (int f : faces) counts[static_cast<std::size_t>(f / 2)]++;
  const double p = 1.0 / 6.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - n * p) <= 3 * sigma);
  // every sample lies on the surface
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    CHECK(std::abs(s.row(i).cwiseAbs().maxCoeff() - 1.0) <= 1e-9);
}

TEST_CASE("load_off_and_sample normalizes") {
  TempDir dir;
  write_text(dir / "cube.off", kCubeOff);
  const PointCloud c = load_off_and_sample(dir / "cube.off", 256, 4);
  CHECK(c.size() == 256);
  CHECK(c.normalized());
  CHECK(c.name == "cube");
}

TEST_CASE("sphere primitive lies on the unit sphere") {
  const Points s = sample_primitive(0, 500, 8);
  CHECK((s.rowwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("dataset sizes and splits") {
  const LabeledDataset ds = generate_shape_dataset(10, 64, 3);
  CHECK(ds.size() == 50);
  CHECK(ds.subset(Split::Train).size() == 40);
  CHECK(ds.subset(Split::Test).size() == 10);
  std::vector<int> train(5, 0), test(5, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto& bucket = ds.splits[i] == Split::Train ? train : test;
    bucket[static_cast<std::size_t>(*ds.clouds[i].label)]++;
    CHECK(ds.clouds[i].normalized());
  }
  for (int c = 0; c < 5; ++c) {
    CHECK(train[static_cast<std::size_t>(c)] == 8);
    CHECK(test[static_cast<std::size_t>(c)] == 2);
  }
  ds.validate();
}

TEST_CASE("dataset generation is deterministic") {
  const LabeledDataset a = generate_shape_dataset(4, 32, 17);
  const LabeledDataset b = generate_shape_dataset(4, 32, 17);
  const LabeledDataset c = generate_shape_dataset(4, 32, 18);
  REQUIRE(a.size() == b.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.clouds[i].points() == b.clouds[i].points());
    CHECK(a.clouds[i].name == b.clouds[i].name);
    any_diff = any_diff || a.clouds[i].points() != c.clouds[i].points();
  }
  CHECK(any_diff);
}

TEST_CASE("dataset write and read back") {
  TempDir dir;
  const LabeledDataset ds = generate_shape_dataset(3, 16, 2);
  write_dataset(ds, dir.path());
  const LabeledDataset back = read_manifest(dir / "manifest.csv");
  REQUIRE(back.size() == ds.size());
  CHECK(back.class_names == ds.class_names);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.clouds[i].label == ds.clouds[i].label);
    CHECK(back.splits[i] == ds.splits[i]);
    CHECK((back.clouds[i].points() - ds.clouds[i].points()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("dataset validation") {
  LabeledDataset ds;
  ds.class_names = {"a", "b"};
  ds.clouds.push_back(PointCloud(Points::Zero(1, 3), 0));
  ds.splits.push_back(Split::Train);
  CHECK_THROWS_AS(ds.validate(), InvalidArgument);  // class b absent from train
  ds.clouds.push_back(PointCloud(Points::Zero(1, 3), 2));
  ds.splits.push_back(Split::Train);
  CHECK_THROWS_AS(ds.validate(), InvalidArgument);  // label out of range
}

TEST_CASE("derive_seed spreads indices") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}
