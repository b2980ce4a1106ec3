#pragma once

#include "aof/pointcloud.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>

namespace aof {

/// Symmetric kNN graph with Gaussian edge weights exp(-d^2 / (2 eps^2)).
struct KnnGraph {
  Eigen::MatrixXd adjacency;
  int k = 0;
  double bandwidth = 0.0;  // eps of the kernel

  Eigen::Index size() const noexcept { return adjacency.rows(); }
};

/// Connects i and j iff j is among the k nearest neighbors of i or i is among
/// those of j. With no fixed bandwidth, eps is the mean length of the N*k
/// directed kNN edges.
///
/// Throws InvalidArgument when k < 1 or k >= N, DegenerateInput when all
/// points coincide.
KnnGraph build_knn_graph(const Points& points, int k, std::optional<double> bandwidth = std::nullopt);

/// Combinatorial Laplacian L = D - A.
Eigen::MatrixXd laplacian(const KnnGraph& graph);

/// Eigenbasis of a graph Laplacian, eigenvalues ascending.
///
/// Immutable once built. Low-pass projections depend on the eigenvectors only
/// through V_m V_m^T, so they are insensitive to eigenvector signs.
class SpectralBasis {
 public:
  SpectralBasis(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors);

  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
  Eigen::Index size() const noexcept { return eigenvalues_.size(); }

  /// V_m V_m^T S for an N-row signal S. m == 0 and m == N return the exact
  /// zero and identity projections.
  Eigen::MatrixXd lowpass(const Eigen::MatrixXd& signal, Eigen::Index m) const;

  /// V^T S: coefficients of every column of S on the eigenvectors.
  Eigen::MatrixXd analyze(const Eigen::MatrixXd& signal) const;

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

/// Throws ShapeError if `l` is not square and symmetric within 1e-10.
SpectralBasis eigendecompose(const Eigen::MatrixXd& l);

/// Graph, Laplacian and eigenbasis of a point cloud in one call.
SpectralBasis spectral_basis(const Points& points, int k, std::optional<double> bandwidth = std::nullopt);

struct FrequencySplit {
  PointCloud lfc;
  PointCloud hfc;  // original - lfc
  SpectralBasis basis;
};

/// Splits a cloud into its low-frequency part (projection of each coordinate
/// signal on the first m eigenvectors) and the high-frequency remainder.
FrequencySplit lfc_split(const PointCloud& cloud, Eigen::Index m, int k,
                         std::optional<double> bandwidth = std::nullopt);

struct PerturbationSplit {
  Points lfc;
  Points hfc;  // delta - lfc
};

PerturbationSplit project_perturbation(const Points& delta, const SpectralBasis& basis, Eigen::Index m);

/// Projections of the x, y and z signals on the eigenvectors.
struct SpectralCoefficients {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
};

SpectralCoefficients spectral_coefficients(const PointCloud& cloud, const SpectralBasis& basis);

/// Binary dump: "AOFBASIS1", N as u64, N eigenvalues, then V column-major;
/// all values little-endian.
void save_basis(const SpectralBasis& basis, const std::filesystem::path& path);
SpectralBasis load_basis(const std::filesystem::path& path);

}  // namespace aof
