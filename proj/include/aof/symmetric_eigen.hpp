#pragma once

#include <Eigen/Core>

namespace aof {

struct SymmetricEigenResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column i pairs with values[i]
};

/// Dense symmetric eigensolver: Householder reduction to tridiagonal form
/// followed by the implicit-shift QL algorithm, with eigenvectors
/// accumulated. Eigenvalues are sorted ascending and the columns permuted
/// with them.
///
/// Throws ConvergenceError if an eigenvalue needs more than
/// `max_iterations` QL sweeps.
SymmetricEigenResult symmetric_eigen(const Eigen::MatrixXd& a, int max_iterations = 30);

}  // namespace aof
