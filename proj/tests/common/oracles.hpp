#pragma once

#include "aof/classifier.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace aof::testing {

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Cyclic Jacobi rotations in extended precision.
inline void jacobi_oracle(const Eigen::MatrixXd& a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index n = a.rows();
  MatL m = a.cast<long double>();
  MatL v = MatL::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    long double off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (off < 1e-40L) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::fabs(m(p, q)) < 1e-300L) continue;
        const long double theta = (m(q, q) - m(p, p)) / (2 * m(p, q));
        const long double t = (theta >= 0 ? 1 : -1) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        const long double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const long double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const long double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const long double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return m(i, i) < m(j, j); });
  values.resize(n);
  vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto o = order[static_cast<std::size_t>(i)];
    values(i) = static_cast<double>(m(o, o));
    vectors.col(i) = v.col(o).cast<double>();
  }
}

// Activation pattern of a forward pass; a change between x+h and x-h means a
// kink lies inside the difference stencil.
inline bool same_pattern(const GradientTape& a, const GradientTape& b) {
  return a.argmax == b.argmax && ((a.pre1.array() > 0) == (b.pre1.array() > 0)).all() &&
         ((a.pre2.array() > 0) == (b.pre2.array() > 0)).all() && ((a.pre3.array() > 0) == (b.pre3.array() > 0)).all();
}

}  // namespace aof::testing
