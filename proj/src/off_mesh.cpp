#include "aof/off_mesh.hpp"

#include "aof/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace aof {

namespace {

// Next line that is neither blank nor a '#' comment, with any trailing
// comment stripped.
bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TriangleMesh parse_off(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_content_line(in, line, line_no)) throw ParseError("empty OFF file", 0);

  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw ParseError("missing OFF header", line_no);

  // Counts may share the header line ("OFF 8 6 0") or follow on the next one.
  long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv >> nf)) {
    if (!next_content_line(in, line, line_no)) throw ParseError("missing vertex/face counts", line_no);
    std::istringstream c(line);
    if (!(c >> nv >> nf)) throw ParseError("malformed vertex/face counts", line_no);
    c >> ne;
    (void)ne;
  }
  if (nv <= 0 || nf < 0) throw ParseError("invalid vertex/face counts", line_no);

  TriangleMesh mesh;
  mesh.vertices.resize(nv, 3);
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line, line_no)) throw ParseError("unexpected end of vertex list", line_no);
    std::istringstream v(line);
    if (!(v >> mesh.vertices(i, 0) >> mesh.vertices(i, 1) >> mesh.vertices(i, 2))) {
      throw ParseError("malformed vertex", line_no);
    }
  }
  if (!mesh.vertices.allFinite()) throw ParseError("non-finite vertex coordinate", 0);

  std::vector<Eigen::Vector3i> tris;
  for (long f = 0; f < nf; ++f) {
    if (!next_content_line(in, line, line_no)) throw ParseError("unexpected end of face list", line_no);
    std::istringstream s(line);
    long arity = 0;
    if (!(s >> arity) || arity < 3) throw ParseError("face needs at least 3 vertices", line_no);
    std::vector<int> idx(static_cast<std::size_t>(arity));
    for (auto& id : idx) {
      long v = -1;
      if (!(s >> v)) throw ParseError("malformed face", line_no);
      if (v < 0 || v >= nv) throw ParseError("face index " + std::to_string(v) + " out of range", line_no);
      id = static_cast<int>(v);
    }
    for (std::size_t j = 1; j + 1 < idx.size(); ++j) tris.emplace_back(idx[0], idx[j], idx[j + 1]);
  }
  mesh.triangles.resize(static_cast<Eigen::Index>(tris.size()), 3);
  for (std::size_t t = 0; t < tris.size(); ++t) mesh.triangles.row(static_cast<Eigen::Index>(t)) = tris[t].transpose();
  return mesh;
}

TriangleMesh load_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_off(in);
}

Points sample_surface(const TriangleMesh& mesh, Eigen::Index n_points, std::uint64_t seed,
                      std::vector<int>* face_of_sample) {
  if (n_points < 1) throw InvalidArgument("n_points must be positive");
  const Eigen::Index nt = mesh.triangles.rows();
  std::vector<double> cumulative(static_cast<std::size_t>(nt));
  double total = 0.0;
  for (Eigen::Index t = 0; t < nt; ++t) {
    const Eigen::RowVector3d a = mesh.vertices.row(mesh.triangles(t, 0));
    const Eigen::RowVector3d b = mesh.vertices.row(mesh.triangles(t, 1));
    const Eigen::RowVector3d c = mesh.vertices.row(mesh.triangles(t, 2));
    total += 0.5 * (b - a).cross(c - a).norm();
    cumulative[static_cast<std::size_t>(t)] = total;
  }
  if (!(total > 0.0)) throw DegenerateInput("mesh has zero total surface area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Points out(n_points, 3);
  if (face_of_sample) face_of_sample->assign(static_cast<std::size_t>(n_points), 0);
  for (Eigen::Index i = 0; i < n_points; ++i) {
    const double pick = unit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto t = static_cast<Eigen::Index>(it - cumulative.begin());
    double r1 = unit(rng), r2 = unit(rng);
    if (r1 + r2 > 1.0) {
      r1 = 1.0 - r1;
      r2 = 1.0 - r2;
    }
    const Eigen::RowVector3d a = mesh.vertices.row(mesh.triangles(t, 0));
    const Eigen::RowVector3d b = mesh.vertices.row(mesh.triangles(t, 1));
    const Eigen::RowVector3d c = mesh.vertices.row(mesh.triangles(t, 2));
    out.row(i) = a + r1 * (b - a) + r2 * (c - a);
    if (face_of_sample) (*face_of_sample)[static_cast<std::size_t>(i)] = static_cast<int>(t);
  }
  return out;
}

PointCloud load_off_and_sample(const std::filesystem::path& path, Eigen::Index n_points, std::uint64_t seed) {
  const TriangleMesh mesh = load_off(path);
  return normalize(PointCloud(sample_surface(mesh, n_points, seed), std::nullopt, path.stem().string()));
}

}  // namespace aof
