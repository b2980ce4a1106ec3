#include "aof/xyz_io.hpp"

#include "aof/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

namespace aof {

namespace {

bool parse_double(const char*& cursor, double& out) {
  while (*cursor == ' ' || *cursor == '\t' || *cursor == '\r') ++cursor;
  if (*cursor == '\0') return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(cursor, &end);
  if (end == cursor) return false;
  if (*end != '\0' && *end != ' ' && *end != '\t' && *end != '\r') return false;
  cursor = end;
  return true;
}

}  // namespace

PointCloud load_xyz(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const char* cursor = line.c_str() + first;
    double xyz[3];
    int count = 0;
    double extra;
    while (count < 3 && parse_double(cursor, xyz[count])) ++count;
    if (count != 3 || parse_double(cursor, extra)) {
      throw ParseError("expected 3 whitespace-separated numbers in " + path.string(), line_no);
    }
    for (double v : xyz) {
      if (!std::isfinite(v)) throw ParseError("non-finite coordinate in " + path.string(), line_no);
      values.push_back(v);
    }
  }
  if (values.empty()) throw ParseError("no points in " + path.string(), 0);

  const auto n = static_cast<Eigen::Index>(values.size() / 3);
  Points points(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) points(i, c) = values[static_cast<std::size_t>(3 * i + c)];
  }
  return PointCloud(std::move(points), std::nullopt, path.stem().string());
}

void save_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
  if (path.empty()) throw IoError("empty output path");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot write " + path.string());
  const Points& p = cloud.points();
  bool ok = true;
  for (Eigen::Index i = 0; i < p.rows() && ok; ++i) {
    ok = std::fprintf(f, "%.17g %.17g %.17g\n", p(i, 0), p(i, 1), p(i, 2)) > 0;
  }
  ok = (std::fclose(f) == 0) && ok;
  if (!ok) throw IoError("failed writing " + path.string());
}

}  // namespace aof
