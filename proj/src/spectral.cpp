#include "aof/spectral.hpp"

#include "aof/error.hpp"
#include "aof/knn.hpp"
#include "aof/symmetric_eigen.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace aof {

KnnGraph build_knn_graph(const Points& points, int k, std::optional<double> bandwidth) {
  const Eigen::Index n = points.rows();
  if (!points.allFinite()) throw InvalidArgument("points must be finite");
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw InvalidArgument("kernel bandwidth must be positive and finite");
  }
  const auto neighbors = knn_indices(points, k);

  bool all_same = true;
  for (Eigen::Index i = 1; i < n && all_same; ++i) all_same = (points.row(i) == points.row(0));
  if (all_same) throw DegenerateInput("kNN graph of a cloud whose points all coincide");

  double eps = 0.0;
  if (bandwidth) {
    eps = *bandwidth;
  } else {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int j : neighbors[static_cast<std::size_t>(i)]) sum += (points.row(i) - points.row(j)).norm();
    }
    eps = sum / static_cast<double>(n * k);
    if (!(eps > 0.0)) throw DegenerateInput("mean kNN distance is zero; pass a fixed bandwidth");
  }

  KnnGraph g;
  g.k = k;
  g.bandwidth = eps;
  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  const double denom = 2.0 * eps * eps;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j : neighbors[static_cast<std::size_t>(i)]) {
      const double w = std::exp(-(points.row(i) - points.row(j)).squaredNorm() / denom);
      g.adjacency(i, j) = w;
      g.adjacency(j, i) = w;
    }
  }
  return g;
}

Eigen::MatrixXd laplacian(const KnnGraph& graph) {
  Eigen::MatrixXd l = -graph.adjacency;
  l.diagonal() = graph.adjacency.rowwise().sum();
  return l;
}

SpectralBasis::SpectralBasis(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors)
    : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {
  if (eigenvectors_.rows() != eigenvalues_.size() || eigenvectors_.cols() != eigenvalues_.size()) {
    throw ShapeError("spectral basis needs N eigenvalues and an N x N eigenvector matrix");
  }
}

Eigen::MatrixXd SpectralBasis::lowpass(const Eigen::MatrixXd& signal, Eigen::Index m) const {
  const Eigen::Index n = size();
  if (signal.rows() != n) {
    throw ShapeError("signal has " + std::to_string(signal.rows()) + " rows, basis has " + std::to_string(n));
  }
  if (m < 0 || m > n) throw InvalidArgument("m must lie in [0, N]");
  // V V^T = I exactly when every eigenvector is kept.
  if (m == 0) return Eigen::MatrixXd::Zero(n, signal.cols());
  if (m == n) return signal;
  const auto vm = eigenvectors_.leftCols(m);
  return vm * (vm.transpose() * signal);
}

Eigen::MatrixXd SpectralBasis::analyze(const Eigen::MatrixXd& signal) const {
  if (signal.rows() != size()) throw ShapeError("signal row count does not match basis dimension");
  return eigenvectors_.transpose() * signal;
}

SpectralBasis eigendecompose(const Eigen::MatrixXd& l) {
  if (l.rows() != l.cols()) throw ShapeError("Laplacian must be square");
  if ((l - l.transpose()).cwiseAbs().maxCoeff() > 1e-10) throw ShapeError("Laplacian is not symmetric");
  auto eig = symmetric_eigen(l);
  return SpectralBasis(std::move(eig.values), std::move(eig.vectors));
}

SpectralBasis spectral_basis(const Points& points, int k, std::optional<double> bandwidth) {
  return eigendecompose(laplacian(build_knn_graph(points, k, bandwidth)));
}

FrequencySplit lfc_split(const PointCloud& cloud, Eigen::Index m, int k, std::optional<double> bandwidth) {
  if (m < 0 || m > cloud.size()) throw InvalidArgument("m must lie in [0, N]");
  SpectralBasis basis = spectral_basis(cloud.points(), k, bandwidth);
  Points lfc = basis.lowpass(cloud.points(), m);
  Points hfc = cloud.points() - lfc;
  return {cloud.with_points(std::move(lfc)), cloud.with_points(std::move(hfc)), std::move(basis)};
}

PerturbationSplit project_perturbation(const Points& delta, const SpectralBasis& basis, Eigen::Index m) {
  if (delta.rows() != basis.size()) throw ShapeError("perturbation row count does not match basis dimension");
  Points lfc = basis.lowpass(delta, m);
  Points hfc = delta - lfc;
  return {std::move(lfc), std::move(hfc)};
}

SpectralCoefficients spectral_coefficients(const PointCloud& cloud, const SpectralBasis& basis) {
  const Eigen::MatrixXd c = basis.analyze(cloud.points());
  return {c.col(0), c.col(1), c.col(2)};
}

namespace {

constexpr char kBasisMagic[] = "AOFBASIS1";
constexpr std::size_t kBasisMagicLen = sizeof(kBasisMagic) - 1;

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

void save_basis(const SpectralBasis& basis, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kBasisMagic, kBasisMagicLen);
  write_raw(out, static_cast<std::uint64_t>(basis.size()));
  out.write(reinterpret_cast<const char*>(basis.eigenvalues().data()),
            static_cast<std::streamsize>(sizeof(double) * basis.eigenvalues().size()));
  out.write(reinterpret_cast<const char*>(basis.eigenvectors().data()),
            static_cast<std::streamsize>(sizeof(double) * basis.eigenvectors().size()));
  if (!out) throw IoError("failed writing " + path.string());
}

SpectralBasis load_basis(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[kBasisMagicLen];
  std::uint64_t n = 0;
  in.read(magic, kBasisMagicLen);
  if (!in || std::memcmp(magic, kBasisMagic, kBasisMagicLen) != 0) throw IoError("bad basis magic in " + path.string());
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || n == 0 || n > (1u << 20)) throw IoError("bad basis dimension in " + path.string());
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::VectorXd values(dim);
  Eigen::MatrixXd vectors(dim, dim);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(sizeof(double) * n));
  in.read(reinterpret_cast<char*>(vectors.data()), static_cast<std::streamsize>(sizeof(double) * n * n));
  if (!in) throw IoError("truncated basis file " + path.string());
  return SpectralBasis(std::move(values), std::move(vectors));
}

}  // namespace aof
